//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use diamag::quantum_box::Operator1d;
use diamag::response::MediumModel;
use diamag::tensor::{delta, isotropic_basis, Tensor4};
use diamag::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre over `panels` equal pieces of [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in &rule {
            s += w * f(lo + 0.5 * h * (x + 1.0));
        }
    }
    0.5 * h * s
}

/// `⟨n|O|n'⟩` on a box [-L/2, L/2] by quadrature; `p = -i d/dx` acts to the
/// right, so `⟨n|p f|n'⟩ = -i∫ψ_n (f ψ_n')'` = `i∫ψ_n' f ψ_n'` after parts.
pub fn element_by_quadrature(kind: Operator1d, n: u32, n2: u32, l: f64) -> Complex64 {
    let psi = |k: u32, x: f64| (2.0 / l).sqrt() * (k as f64 * PI / l * (x + l / 2.0)).sin();
    let dpsi = |k: u32, x: f64| (2.0 / l).sqrt() * (k as f64 * PI / l) * (k as f64 * PI / l * (x + l / 2.0)).cos();
    let panels = 8 + 2 * (n.max(n2) as usize);
    let a = -l / 2.0;
    let b = l / 2.0;
    let plain = |pow: i32| integrate(|x| psi(n, x) * x.powi(pow) * psi(n2, x), a, b, panels);
    // boundary terms vanish because ψ_n(±L/2) = 0
    let with_p = |pow: i32| Complex64::new(0.0, integrate(|x| dpsi(n, x) * x.powi(pow) * psi(n2, x), a, b, panels));
    match kind {
        Operator1d::Overlap => plain(0).into(),
        Operator1d::X => plain(1).into(),
        Operator1d::X2 => plain(2).into(),
        Operator1d::P => with_p(0),
        Operator1d::PX => with_p(1),
        Operator1d::PX2 => with_p(2),
    }
}

/// Rotational average by explicit index summation over the isotropic rank-8
/// projector built from Kronecker deltas.
pub fn brute_iso4_average(f: &Tensor4<f64>) -> Tensor4<f64> {
    let b = |p: usize, i: usize, k: usize, m: usize, j: usize| match p {
        0 => delta(i, k) * delta(m, j),
        1 => delta(i, m) * delta(k, j),
        _ => delta(i, j) * delta(k, m),
    };
    let weights = [[4.0, -1.0, -1.0], [-1.0, 4.0, -1.0], [-1.0, -1.0, 4.0]];
    Tensor4::from_fn(|i, k, m, j| {
        let mut s = 0.0;
        for a in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    for e in 0..3 {
                        let mut w = 0.0;
                        for (p, row) in weights.iter().enumerate() {
                            for (q, wpq) in row.iter().enumerate() {
                                w += wpq * b(p, i, k, m, j) * b(q, a, c, d, e);
                            }
                        }
                        s += w / 30.0 * f.get(a, c, d, e);
                    }
                }
            }
        }
        s
    })
}

/// The 60 proper rotations of the icosahedron. Averaging any polynomial of
/// degree ≤ 5 in the rotation entries over them equals the Haar average.
pub fn icosahedral_group() -> Vec<[[f64; 3]; 3]> {
    let axis_rotation = |axis: [f64; 3], angle: f64| {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let [x, y, z] = axis.map(|v| v / n);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    };
    let mul = |a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]| {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        r
    };
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let gens = [axis_rotation([0.0, 1.0, phi], 2.0 * PI / 5.0), axis_rotation([1.0, 1.0, 1.0], 2.0 * PI / 3.0)];
    let same = |a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]| (0..3).all(|i| (0..3).all(|j| (a[i][j] - b[i][j]).abs() < 1e-9));
    let mut group = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
    let mut frontier = group.clone();
    while let Some(g) = frontier.pop() {
        for h in &gens {
            let p = mul(h, &g);
            if !group.iter().any(|q| same(q, &p)) {
                group.push(p);
                frontier.push(p);
            }
        }
    }
    group
}

/// Haar average `∫dR R_ia R_kb R_mc R_jd f_abcd` via the icosahedral group.
pub fn group_average(f: &Tensor4<f64>) -> Tensor4<f64> {
    let group = icosahedral_group();
    assert_eq!(group.len(), 60);
    let mut acc = Tensor4::<f64>::zeros();
    for r in &group {
        acc = acc + f.rotated(r);
    }
    acc.scale(1.0 / 60.0)
}

/// `Σ_p c_p B_p` on the isotropic basis.
pub fn isotropic(c: [f64; 3]) -> Tensor4<f64> {
    let [a, b, d] = isotropic_basis();
    a.scale(c[0]) + b.scale(c[1]) + d.scale(c[2])
}

/// Positive roots of `k² = ω²εμ` in the lossless limit, counted as sign
/// changes of the denominator-free polynomial
/// `ω² Π_e D_e · ε - k² Π_e D_e · (1/μ)` on a dense grid.
pub fn dense_scan_count(model: &MediumModel, k: f64, omega_max: f64, n: usize) -> usize {
    let ts = &model.transitions;
    let poly = |w: f64| {
        let d: Vec<f64> = ts.iter().map(|t| t.omega_eg * t.omega_eg - w * w).collect();
        let all: f64 = d.iter().product();
        let others = |e: usize| d.iter().enumerate().filter(|(i, _)| *i != e).map(|(_, v)| v).product::<f64>();
        let mut eps = all;
        let mut inv_mu = all;
        for (e, t) in ts.iter().enumerate() {
            eps += t.d_edip * others(e);
            inv_mu += t.d_dia / (t.omega_eg * t.omega_eg) * all
                - t.d_mdip * others(e)
                - (t.d_quad - t.d_dipoct) * w * w * others(e);
        }
        w * w * eps - k * k * inv_mu
    };
    let mut count = 0;
    let mut prev = poly(omega_max * 1e-9);
    for i in 1..=n {
        let w = omega_max * i as f64 / n as f64;
        let v = poly(w);
        if v == 0.0 || v * prev < 0.0 {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}
