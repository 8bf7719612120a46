//! Polariton branches of `k² = ω²ε(ω)μ(ω)` and the optical sum rule
//! `Re Σ_j μ(ω_j) v_p v_g = 1`.
//!
//! Branches are found in the lossless limit, where `G(ω) = ω²ε(ω) - k²/μ(ω)` is
//! real with simple poles at the transition frequencies. Clearing the
//! denominators turns `G` into a polynomial of degree `P + 1` in `ω²`, `P` being
//! the number of poles with non-zero residue, so a complete set at fixed `k`
//! has `P + 1` roots and exactly one root per interval between poles.

use num_complex::Complex64;

use crate::multipole::TransitionStrengths;
use crate::response::MediumModel;
use crate::{Error, Result};

/// Relative stencil step for the group velocity.
const FD_STEP: f64 = 1e-3;
const SCAN_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionBranch {
    pub k_grid: Vec<f64>,
    pub omega: Vec<f64>,
    pub v_p: Vec<f64>,
    pub v_g: Vec<f64>,
    /// Root of the damped equation continued from `omega` at the solve's
    /// `gamma_scale`; `None` where the continuation did not converge.
    pub omega_damped: Vec<Option<Complex64>>,
}

impl DispersionBranch {
    fn new() -> Self {
        Self { k_grid: Vec::new(), omega: Vec::new(), v_p: Vec::new(), v_g: Vec::new(), omega_damped: Vec::new() }
    }

    pub fn index_of(&self, k: f64) -> Option<usize> {
        self.k_grid.iter().position(|&x| x == k)
    }
}

/// A root that could not be bracketed or refined.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketFailure {
    pub k: f64,
    pub interval: (f64, f64),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSolution {
    pub branches: Vec<DispersionBranch>,
    pub failures: Vec<BracketFailure>,
    pub gamma_scale: f64,
    /// `(k, roots found, roots expected)` per grid point; the expected count
    /// (active poles + 1) is the degree in `ω²`, so a shortfall means missed
    /// roots or a complex pair
    pub counts: Vec<(f64, usize, usize)>,
}

impl BranchSolution {
    pub fn is_complete_at(&self, k: f64) -> bool {
        self.counts.iter().any(|&(x, found, expected)| x == k && found == expected)
    }
}

/// Real lossless dispersion function at one `k`.
struct Lossless<'a> {
    model: &'a MediumModel,
    k: f64,
}

impl Lossless<'_> {
    fn g(&self, w: f64) -> f64 {
        let eps = self.model.epsilon(w).re;
        let inv_mu = self.model.inverse_mu(w).re;
        w * w * eps - self.k * self.k * inv_mu
    }
}

/// Model with every linewidth set to zero.
pub fn lossless(model: &MediumModel) -> MediumModel {
    model.clone().with_gamma_scale(0.0)
}

/// Relative spread below which transition frequencies count as one pole;
/// symmetric boxes give degenerate lines that differ only by rounding.
const POLE_MERGE: f64 = 1e-9;

/// Poles of `G` at wavevector `k`: transition frequencies whose combined
/// residue `ω₀²Δ_edip + k²[Δ_mdip + (Δ_quad - Δ_dipoct)ω₀²]` is non-zero.
/// Degenerate lines are merged and reported once, at their mean.
pub fn active_poles(model: &MediumModel, k: f64) -> Vec<f64> {
    let mut ts: Vec<_> = model.transitions.iter().collect();
    ts.sort_by(|a, b| a.omega_eg.partial_cmp(&b.omega_eg).unwrap());
    let mut clusters: Vec<Vec<&TransitionStrengths>> = Vec::new();
    for t in ts {
        match clusters.last_mut() {
            Some(c) if t.omega_eg - c[0].omega_eg <= POLE_MERGE * t.omega_eg => c.push(t),
            _ => clusters.push(vec![t]),
        }
    }
    clusters
        .into_iter()
        .filter_map(|c| {
            let mut r = 0.0f64;
            let mut scale = 0.0;
            for t in &c {
                let w0 = t.omega_eg;
                let parts = [w0 * w0 * t.d_edip, k * k * t.d_mdip, k * k * (t.d_quad - t.d_dipoct) * w0 * w0];
                r += parts.iter().sum::<f64>();
                scale += parts.iter().map(|p| p.abs()).sum::<f64>();
            }
            let mean = c.iter().map(|t| t.omega_eg).sum::<f64>() / c.len() as f64;
            (r.abs() > 1e-12 * scale).then_some(mean)
        })
        .collect()
}

/// Uniform points plus offsets halving towards each end down to float
/// resolution; weak poles pin their roots within a few ulp of the pole.
fn scan_points(a: f64, b: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(SCAN_POINTS + 256);
    for i in 1..SCAN_POINTS {
        pts.push(a + (b - a) * i as f64 / SCAN_POINTS as f64);
    }
    for (end, dir) in [(a, 1.0), (b, -1.0)] {
        let floor = 2.0 * f64::EPSILON * end.abs();
        let mut d = 0.5 * (b - a);
        while d > floor && d > f64::MIN_POSITIVE {
            pts.push(end + dir * d);
            d *= 0.5;
        }
    }
    pts.retain(|&x| x > a && x < b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Upper end of the search: beyond every pole and the light line.
fn search_ceiling(poles: &[f64], k: f64, model: &MediumModel) -> f64 {
    let top = poles.last().copied().unwrap_or(0.0);
    // far above every pole, ω ≈ k/√(ε∞/μ∞-ish); inflate generously
    let inv_mu_inf = 1.0 - model.chi_infinity();
    let light = k * inv_mu_inf.abs().max(1.0).sqrt();
    10.0 * top.max(light) + 10.0
}

/// Real positive roots of the lossless equation at `k`, ascending, with the
/// intervals in which each was bracketed.
fn roots_at(model: &MediumModel, k: f64) -> (Vec<(f64, (f64, f64))>, Vec<BracketFailure>, usize) {
    let poles = active_poles(model, k);
    let ceiling = search_ceiling(&poles, k, model);
    let mut edges = vec![0.0];
    edges.extend(poles.iter().copied());
    edges.push(ceiling);
    let g = Lossless { model, k };
    let f = |w: f64| g.g(w);
    let mut roots = Vec::new();
    let mut failures = Vec::new();
    let mut anomalies = Vec::new();
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        let pts = scan_points(a, b);
        let vals: Vec<f64> = pts.iter().map(|&w| f(w)).collect();
        let mut found = 0;
        for i in 1..pts.len() {
            if vals[i - 1] == 0.0 {
                roots.push((pts[i - 1], (a, b)));
                found += 1;
            } else if vals[i - 1] * vals[i] < 0.0 {
                roots.push((bisect(&f, pts[i - 1], pts[i]), (a, b)));
                found += 1;
            }
        }
        // zero or two roots between a pair of poles is legitimate when the
        // residues differ in sign; it only matters if the total comes up short
        if found == 0 {
            anomalies.push(BracketFailure { k, interval: (a, b), reason: "no sign change in interval".into() });
        } else if found > 1 {
            anomalies.push(BracketFailure { k, interval: (a, b), reason: format!("{found} roots in one interval") });
        }
    }
    let expected = poles.len() + 1;
    if roots.len() != expected {
        failures.extend(anomalies);
    }
    (roots, failures, expected)
}

/// Root near `guess` inside `(a, b)` at wavevector `k`, by bracket expansion
/// and bisection.
fn resolve_near(model: &MediumModel, k: f64, guess: f64, a: f64, b: f64) -> Option<f64> {
    let g = Lossless { model, k };
    let f = |w: f64| g.g(w);
    let f0 = f(guess);
    if f0 == 0.0 {
        return Some(guess);
    }
    let mut step = (1e-6 * guess.max(1e-12)).min(0.5 * (guess - a)).min(0.5 * (b - guess));
    for _ in 0..200 {
        let lo = (guess - step).max(0.5 * (a + guess));
        let hi = (guess + step).min(0.5 * (guess + b));
        let (flo, fhi) = (f(lo), f(hi));
        if flo * f0 <= 0.0 {
            return Some(bisect(&f, lo, guess));
        }
        if fhi * f0 <= 0.0 {
            return Some(bisect(&f, guess, hi));
        }
        if step >= b - a {
            return None;
        }
        step *= 2.0;
    }
    None
}

/// `dω/dk` by the five-point stencil, re-solving the root at each shifted `k`.
fn group_velocity(model: &MediumModel, k: f64, omega: f64, bracket: (f64, f64)) -> Option<f64> {
    let h = FD_STEP * k;
    let mut w = [0.0; 4];
    for (slot, j) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        w[slot] = resolve_near(model, k + j * h, omega, bracket.0, bracket.1)?;
    }
    Some((w[0] - 8.0 * w[1] + 8.0 * w[2] - w[3]) / (12.0 * h))
}

/// Damped root continued from a lossless one by complex Newton iteration.
fn damped_root(model: &MediumModel, k: f64, start: f64) -> Option<Complex64> {
    let g = |w: Complex64| {
        let eps = 1.0 + model.chi_e_at(w);
        let inv_mu = 1.0 - model.chi_at(w);
        w * w * eps - k * k * inv_mu
    };
    let mut w = Complex64::new(start, 0.0);
    for _ in 0..100 {
        let h = 1e-7 * w.norm().max(1e-6);
        let d = (g(w + h) - g(w - h)) / (2.0 * h);
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let step = g(w) / d;
        w -= step;
        if !w.is_finite() {
            return None;
        }
        if step.norm() <= 1e-13 * w.norm() {
            return Some(w);
        }
    }
    None
}

fn validate_grid(k_grid: &[f64], gamma_scale: f64) -> Result<()> {
    if !(gamma_scale > 0.0 && gamma_scale <= 1.0) {
        return Err(Error::InvalidParameter(format!("gamma_scale must lie in (0, 1] (got {gamma_scale})")));
    }
    if k_grid.is_empty() {
        return Err(Error::GridTooShort { got: 0, need: 1 });
    }
    if let Some(&k) = k_grid.iter().find(|&&k| !(k > 0.0) || !k.is_finite()) {
        return Err(Error::InvalidParameter(format!("wavevectors must be positive (got {k})")));
    }
    if k_grid.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::GridNotIncreasing);
    }
    Ok(())
}

/// Order-preserving assignment of `new` roots to `old` branch ends with the
/// least total distance; `None` marks an unmatched new root.
fn match_roots(old: &[f64], new: &[f64]) -> Vec<Option<usize>> {
    let (n, m) = (old.len(), new.len());
    let pairs = n.min(m);
    // cost[i][j][p]: best cost using old[..i], new[..j] with p pairs; small sizes only
    let inf = f64::INFINITY;
    let mut cost = vec![vec![vec![inf; pairs + 1]; m + 1]; n + 1];
    for row in cost.iter_mut() {
        for cell in row.iter_mut() {
            cell[0] = 0.0;
        }
    }
    for i in 1..=n {
        for j in 1..=m {
            for p in 1..=pairs {
                let skip_old = cost[i - 1][j][p];
                let skip_new = cost[i][j - 1][p];
                let take = cost[i - 1][j - 1][p - 1] + (old[i - 1] - new[j - 1]).abs();
                cost[i][j][p] = skip_old.min(skip_new).min(take);
            }
        }
    }
    let mut out = vec![None; m];
    let (mut i, mut j, mut p) = (n, m, pairs);
    while p > 0 && i > 0 && j > 0 {
        let take = cost[i - 1][j - 1][p - 1] + (old[i - 1] - new[j - 1]).abs();
        if cost[i][j][p] == take {
            out[j - 1] = Some(i - 1);
            i -= 1;
            j -= 1;
            p -= 1;
        } else if cost[i][j][p] == cost[i - 1][j][p] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out
}

/// All real branches over `k_grid` in the lossless limit, each lossless root
/// also continued to the damped equation with linewidths scaled by
/// `gamma_scale`.
pub fn solve_branches(model: &MediumModel, k_grid: &[f64], gamma_scale: f64) -> Result<BranchSolution> {
    validate_grid(k_grid, gamma_scale)?;
    let clean = lossless(model);
    let damped = model.clone().with_gamma_scale(gamma_scale);
    let mut branches: Vec<DispersionBranch> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut failures = Vec::new();
    let mut counts = Vec::with_capacity(k_grid.len());

    for &k in k_grid {
        let mut found: Vec<(f64, f64, Option<Complex64>)> = Vec::new();
        if model.is_vacuum() {
            found.push((k, 1.0, Some(Complex64::new(k, 0.0))));
            counts.push((k, 1, 1));
        } else {
            let (roots, fails, expected) = roots_at(&clean, k);
            failures.extend(fails);
            counts.push((k, roots.len(), expected));
            for (w, bracket) in roots {
                let vg = match group_velocity(&clean, k, w, bracket) {
                    Some(v) => v,
                    None => {
                        failures.push(BracketFailure {
                            k,
                            interval: bracket,
                            reason: format!("stencil re-solve failed near ω = {w}"),
                        });
                        f64::NAN
                    }
                };
                let wd = damped_root(&damped, k, w);
                if wd.is_none() {
                    failures.push(BracketFailure {
                        k,
                        interval: bracket,
                        reason: format!("damped continuation failed from ω = {w}"),
                    });
                }
                found.push((w, vg, wd));
            }
        }
        let ends: Vec<f64> = open.iter().map(|&b| *branches[b].omega.last().unwrap()).collect();
        let news: Vec<f64> = found.iter().map(|r| r.0).collect();
        let assignment = match_roots(&ends, &news);
        let mut next_open = Vec::with_capacity(found.len());
        for ((w, vg, wd), slot) in found.into_iter().zip(assignment) {
            let b = match slot {
                Some(i) => open[i],
                None => {
                    branches.push(DispersionBranch::new());
                    branches.len() - 1
                }
            };
            let br = &mut branches[b];
            br.k_grid.push(k);
            br.omega.push(w);
            br.v_p.push(w / k);
            br.v_g.push(vg);
            br.omega_damped.push(wd);
            next_open.push(b);
        }
        open = next_open;
    }
    // label by frequency at the first sampled k
    branches.sort_by(|a, b| {
        a.k_grid[0].partial_cmp(&b.k_grid[0]).unwrap().then(a.omega[0].partial_cmp(&b.omega[0]).unwrap())
    });
    Ok(BranchSolution { branches, failures, gamma_scale, counts })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSumRule {
    /// `Re Σ_j μ(ω_j) v_p v_g - 1`
    pub residual: f64,
    pub roots: usize,
    pub expected: usize,
    /// `false` when roots are missing, so the residual cannot be trusted
    pub reliable: bool,
}

/// Optical sum rule at one `k` of a lossless solve.
pub fn optical_sum_rule_residual(solution: &BranchSolution, model: &MediumModel, k: f64) -> Result<OpticalSumRule> {
    let (found, expected) = solution
        .counts
        .iter()
        .find(|c| c.0 == k)
        .map(|c| (c.1, c.2))
        .ok_or_else(|| Error::InvalidParameter(format!("k = {k} is not on the solved grid")))?;
    if model.is_vacuum() {
        return Ok(OpticalSumRule { residual: 0.0, roots: 1, expected: 1, reliable: true });
    }
    let clean = lossless(model);
    let mut sum = 0.0;
    let mut usable = true;
    for br in &solution.branches {
        if let Some(i) = br.index_of(k) {
            let inv = clean.inverse_mu(br.omega[i]).re;
            if inv == 0.0 || !br.v_g[i].is_finite() {
                usable = false;
                continue;
            }
            sum += br.v_p[i] * br.v_g[i] / inv;
        }
    }
    Ok(OpticalSumRule { residual: sum - 1.0, roots: found, expected, reliable: usable && found == expected })
}

/// Same sum with the damped roots, `v_g = 2k/(μ ∂_ω G)`, keeping the real part.
pub fn damped_sum_rule_residual(solution: &BranchSolution, model: &MediumModel, k: f64) -> Result<f64> {
    let damped = model.clone().with_gamma_scale(solution.gamma_scale);
    let g = |w: Complex64| {
        let eps = 1.0 + damped.chi_e_at(w);
        let inv_mu = 1.0 - damped.chi_at(w);
        (w * w * eps - k * k * inv_mu, inv_mu)
    };
    let mut sum = Complex64::new(0.0, 0.0);
    for br in &solution.branches {
        let Some(i) = br.index_of(k) else { continue };
        let w = br.omega_damped[i]
            .ok_or_else(|| Error::InvalidParameter(format!("no damped root at k = {k}, ω = {}", br.omega[i])))?;
        let h = 1e-6 * w.norm();
        let dg = (g(w + h).0 - g(w - h).0) / (2.0 * h);
        let inv_mu = g(w).1;
        let vg = 2.0 * k * inv_mu / dg;
        sum += (w / k) * vg / inv_mu;
    }
    Ok(sum.re - 1.0)
}
