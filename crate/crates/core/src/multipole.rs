//! Rotational averaging of transition moments into channel strengths, and
//! the Thomas-Reiche-Kuhn sum-rule family used to check basis truncation.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::quantum_box::{BoxGeometry, GroundTensors, MomentSet};
use crate::tensor::{delta, isotropic_basis, Scalar, Tensor4};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Weights of the isotropic rank-4 projector, `M/30` with
/// `M = [[4,-1,-1],[-1,4,-1],[-1,-1,4]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iso4Weights {
    pub numerators: [[i32; 3]; 3],
    pub denominator: i32,
}

impl Default for Iso4Weights {
    fn default() -> Self {
        Self { numerators: [[4, -1, -1], [-1, 4, -1], [-1, -1, 4]], denominator: 30 }
    }
}

impl Iso4Weights {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let d = self.denominator as f64;
        self.numerators.map(|row| row.map(|v| v as f64 / d))
    }

    pub fn apply<T: Scalar>(&self, c: [T; 3]) -> [T; 3] {
        let w = self.matrix();
        let mut out = [T::default(); 3];
        for (o, row) in out.iter_mut().zip(w.iter()) {
            for (cv, wv) in c.iter().zip(row.iter()) {
                *o += *cv * *wv;
            }
        }
        out
    }
}

/// Coefficients of the isotropic part of `f` on the basis
/// `(δ_ikδ_mj, δ_imδ_kj, δ_ijδ_km)`.
pub fn iso4_coefficients<T: Scalar>(f: &Tensor4<T>) -> [T; 3] {
    Iso4Weights::default().apply(f.contractions())
}

/// Rotational average of a rank-4 tensor; a projector onto the isotropic subspace.
pub fn iso4_average<T: Scalar>(f: &Tensor4<T>) -> Tensor4<T> {
    let c = iso4_coefficients(f);
    let basis = isotropic_basis();
    Tensor4::from_fn(|i, k, m, j| {
        let mut v = T::default();
        for (cv, b) in c.iter().zip(basis.iter()) {
            v += *cv * b.get(i, k, m, j);
        }
        v
    })
}

/// `⟨⟨f⟩⟩ = -(1/30)[4 f_δννδ - f_νδνδ - f_ννδδ]`, the scalar that multiplies
/// `k²A` for a transverse probe, with its leading minus sign.
pub fn scalar_average<T: Scalar>(f: &Tensor4<T>) -> T {
    let [c1, c2, c3] = f.contractions();
    (c3 * 4.0 - c2 - c1) * (-1.0 / 30.0)
}

/// Rotationally averaged strengths of one transition, in units of `ω_p²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransitionStrengths {
    pub omega_eg: f64,
    pub gamma_e: f64,
    pub d_edip: f64,
    pub d_quad: f64,
    pub d_mdip: f64,
    pub d_dia: f64,
    pub d_dipoct: f64,
}

impl TransitionStrengths {
    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidTransition { index, reason: reason.to_string() });
        let all = [self.omega_eg, self.gamma_e, self.d_edip, self.d_quad, self.d_mdip, self.d_dia, self.d_dipoct];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value");
        }
        if self.omega_eg <= 0.0 {
            return bad("omega_eg must be positive");
        }
        if self.gamma_e < 0.0 {
            return bad("gamma_e must be non-negative");
        }
        if self.d_edip < 0.0 {
            return bad("d_edip must be non-negative");
        }
        Ok(())
    }
}

/// Products of moments that feed each channel, slots ordered `(i, k, m, j)`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelTensors {
    /// `[(p_k r_i) + (p_i r_k)]^{ge} (p_j r_m)^{eg}`
    pub quad: Tensor4<Complex64>,
    /// `[(p_k r_i) - (p_i r_k)]^{ge} (p_j r_m)^{eg}`
    pub mdip: Tensor4<Complex64>,
    /// `[(p_i r_m) + (p_m r_i)]^{ge} (p_j r_k)^{eg}`
    pub dia: Tensor4<Complex64>,
    /// `p_i^{ge} (p_j r_k r_m)^{eg} + p_j^{ge} (p_i r_k r_m)^{eg}`
    pub dipoct: Tensor4<Complex64>,
}

impl ChannelTensors {
    pub fn new(ms: &MomentSet) -> Self {
        let (g, e) = (&ms.ge, &ms.eg);
        Self {
            quad: Tensor4::from_fn(|i, k, m, j| (g.pr[k][i] + g.pr[i][k]) * e.pr[j][m]),
            mdip: Tensor4::from_fn(|i, k, m, j| (g.pr[k][i] - g.pr[i][k]) * e.pr[j][m]),
            dia: Tensor4::from_fn(|i, k, m, j| (g.pr[i][m] + g.pr[m][i]) * e.pr[j][k]),
            dipoct: Tensor4::from_fn(|i, k, m, j| g.p[i] * e.prr[j][k][m] + g.p[j] * e.prr[i][k][m]),
        }
    }
}

fn edip_product(ms: &MomentSet) -> Complex64 {
    (0..3).map(|i| ms.ge.p[i] * ms.eg.p[i]).sum()
}

/// Channel strengths of one transition.
///
/// The electric-dipole strength is `2 p^{ge}·p^{eg}/(3mω)`, so that a complete
/// basis gives `Σ Δ_edip = ω_p²`. The other four are `∓⟨⟨T⟩⟩` times
/// `1/(mω)` or `ω/m`; the signs are fixed so that the static diamagnetic,
/// quadrupole and dipole-octupole sums reproduce the ground-state sum rules
/// (`Σ Δ_dia/ω² = Σ Δ_quad = ω_p²⟨r²⟩/6`, `Σ Δ_dipoct = ω_p²⟨r²⟩/3`) and the
/// magnetic-dipole channel is paramagnetic.
pub fn transition_strengths(ms: &MomentSet, geom: &BoxGeometry, gamma_e: f64) -> Result<TransitionStrengths> {
    let w = ms.omega_eg;
    if !(w > 0.0) {
        return Err(Error::NonPositiveFrequency(w));
    }
    let m = geom.mass;
    let t = ChannelTensors::new(ms);
    Ok(TransitionStrengths {
        omega_eg: w,
        gamma_e,
        d_edip: 2.0 * edip_product(ms).re / (3.0 * m * w),
        d_quad: -scalar_average(&t.quad).re / (m * w),
        d_mdip: (w / m) * scalar_average(&t.mdip).re,
        d_dia: -(w / m) * scalar_average(&t.dia).re,
        d_dipoct: -scalar_average(&t.dipoct).re / (m * w),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    ElectricDipole,
    Quadrupole,
    MagneticDipole,
    Diamagnetic,
    DipoleOctupole,
    /// `p_i^{ge}(p_j r_m)^{eg}`: reported, never summed into a response.
    ChiralDropped,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::ElectricDipole => "e-dip",
            Channel::Quadrupole => "quad",
            Channel::MagneticDipole => "m-dip",
            Channel::Diamagnetic => "dia",
            Channel::DipoleOctupole => "dip-oct",
            Channel::ChiralDropped => "chiral(dropped)",
        })
    }
}

/// Channels whose moment products are non-zero for this transition.
pub fn classify(ms: &MomentSet) -> BTreeSet<Channel> {
    let t = ChannelTensors::new(ms);
    let mut chiral = 0.0f64;
    let mut edip = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            edip = edip.max((ms.ge.p[i] * ms.eg.p[j]).norm());
            for m in 0..3 {
                chiral = chiral.max((ms.ge.p[i] * ms.eg.pr[j][m]).norm());
            }
        }
    }
    let sizes = [
        (Channel::ElectricDipole, edip),
        (Channel::Quadrupole, t.quad.max_abs()),
        (Channel::MagneticDipole, t.mdip.max_abs()),
        (Channel::Diamagnetic, t.dia.max_abs()),
        (Channel::DipoleOctupole, t.dipoct.max_abs()),
        (Channel::ChiralDropped, chiral),
    ];
    // channels differ in units, so compare each product against the moments it is built from
    let p = ms.ge.p.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let pr = ms.ge.pr.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let prr = ms.eg.prr.iter().flatten().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = |c: Channel| match c {
        Channel::ElectricDipole => p * p,
        Channel::Quadrupole | Channel::MagneticDipole | Channel::Diamagnetic => pr * pr,
        Channel::DipoleOctupole => p * prr,
        Channel::ChiralDropped => p * pr,
    };
    sizes.into_iter().filter(|&(c, v)| v > 0.0 && v > 1e-12 * scale(c)).map(|(c, _)| c).collect()
}

/// Truncation residuals of the sum-rule family, as max-norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrkReport {
    /// `max_ij |δ_ij - (1/m)Σ_e p_i^{ge}p_j^{eg}/ω_eg + (e↔g)|`
    pub dipole: f64,
    /// the same restricted to `i = j`
    pub dipole_diagonal: f64,
    /// dipole-octupole form of the rank-4 rule against `δ_ij (r_m r_n)^{gg}`, divided by `⟨r²⟩`
    pub octupole: f64,
    /// quadrupole form of the rank-4 rule, divided by `⟨r²⟩`; its complete-basis value is
    /// `2δ_ij(rr)_km + δ_jk(rr)_im + δ_jm(rr)_ik`
    pub quadrupole: f64,
}

pub fn trk_residuals(transitions: &[MomentSet], gt: &GroundTensors, geom: &BoxGeometry) -> Result<TrkReport> {
    if transitions.is_empty() {
        return Err(Error::EmptyTransitions);
    }
    let m = geom.mass;
    let mut dip = [[Complex64::new(0.0, 0.0); 3]; 3];
    let mut oct = Tensor4::<Complex64>::zeros();
    let mut quad = Tensor4::<Complex64>::zeros();
    for ms in transitions {
        let w = ms.omega_eg;
        if !(w > 0.0) {
            return Err(Error::NonPositiveFrequency(w));
        }
        let (g, e) = (&ms.ge, &ms.eg);
        let f = 1.0 / (m * w);
        for i in 0..3 {
            for j in 0..3 {
                // swapping e and g also flips the sign of ω_eg
                dip[i][j] += (g.p[i] * e.p[j] + e.p[i] * g.p[j]) * f;
            }
        }
        // slots (i, j, m, n)
        oct = oct
            + Tensor4::from_fn(|i, j, mm, n| {
                let d = delta(j, mm);
                (g.p[i] * (e.prr[j][mm][n] + I * d * e.r[n]) + e.p[i] * (g.prr[j][mm][n] + I * d * g.r[n])) * f
            });
        // slots (i, k, j, m)
        let half = |a: &crate::quantum_box::Moments,
                    b: &crate::quantum_box::Moments,
                    i: usize,
                    k: usize,
                    j: usize,
                    mm: usize| {
            (a.pr[i][k] + a.pr[k][i]) * b.pr[j][mm] + (a.pr[mm][i] + a.pr[i][mm]) * b.pr[j][k]
        };
        quad = quad + Tensor4::from_fn(|i, k, j, mm| (half(g, e, i, k, j, mm) + half(e, g, i, k, j, mm)) * f);
    }
    let mut dipole = 0.0f64;
    let mut diag = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let r = (Complex64::new(delta(i, j), 0.0) - dip[i][j]).norm();
            dipole = dipole.max(r);
            if i == j {
                diag = diag.max(r);
            }
        }
    }
    let rr = gt.rr;
    let oct_target = Tensor4::from_fn(|i, j, mm, n| Complex64::new(delta(i, j) * rr[mm][n], 0.0));
    let quad_target = Tensor4::from_fn(|i, k, j, mm| {
        Complex64::new(2.0 * delta(i, j) * rr[k][mm] + delta(j, k) * rr[i][mm] + delta(j, mm) * rr[i][k], 0.0)
    });
    Ok(TrkReport {
        dipole,
        dipole_diagonal: diag,
        octupole: (oct - oct_target).max_abs() / gt.r2,
        quadrupole: (quad - quad_target).max_abs() / gt.r2,
    })
}

/// Complete-basis value of `Σ_e Δ_dia/ω_eg²` (units `ω_p²`), from the ground-state
/// tensor `½[δ_ij(rr)_km + δ_mj(rr)_ik]` that the quadrupole sum rule assigns to
/// `(1/m)Σ_e [(p_i r_m)+(p_m r_i)]^{ge}(p_j r_k)^{eg}/ω_eg`.
pub fn diamagnetic_closure(gt: &GroundTensors) -> f64 {
    let rr = gt.rr;
    let t = Tensor4::from_fn(|i, k, m, j| 0.5 * (delta(i, j) * rr[k][m] + delta(m, j) * rr[i][k]));
    -scalar_average(&t)
}
