//! Kramers-Kronig transforms, the static identity `χ(0) = (2/π)∫ Im χ(ω)/ω dω`,
//! passivity scans and a time-domain causality check.
//!
//! Tabulated data live on `ω ≥ 0`; the negative half-axis follows from
//! `χ(-ω) = χ*(ω)`, so real parts are even and imaginary parts odd.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rustfft::FftPlanner;

use crate::response::MediumModel;
use crate::{Error, Result};

pub const MIN_GRID_POINTS: usize = 64;

/// `f(ω) ≈ coefficient · ω^(-exponent)` beyond the last grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub coefficient: f64,
}

impl PowerLaw {
    pub fn eval(&self, w: f64) -> f64 {
        self.coefficient * w.powf(-self.exponent)
    }

    /// Exponent and coefficient through the last two samples; `None` if they
    /// change sign or do not decay.
    pub fn fit(w: &[f64], f: &[f64]) -> Option<Self> {
        let n = w.len();
        if n < 2 {
            return None;
        }
        let (w1, w2, f1, f2) = (w[n - 2], w[n - 1], f[n - 2], f[n - 1]);
        if f2 == 0.0 && f1 == 0.0 {
            return Some(Self { exponent: 1.0, coefficient: 0.0 });
        }
        if f1 * f2 <= 0.0 {
            return None;
        }
        let exponent = (f1 / f2).ln() / (w2 / w1).ln();
        if !exponent.is_finite() {
            return None;
        }
        Some(Self { exponent, coefficient: f2 * w2.powf(exponent) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub re: PowerLaw,
    pub im: PowerLaw,
}

/// Samples of a causal response on a non-negative, strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse {
    omegas: Vec<f64>,
    values: Vec<Complex64>,
    tail: Tail,
}

impl TabulatedResponse {
    pub fn new(omegas: Vec<f64>, values: Vec<Complex64>, tail: Tail) -> Result<Self> {
        if omegas.len() < MIN_GRID_POINTS {
            return Err(Error::GridTooShort { got: omegas.len(), need: MIN_GRID_POINTS });
        }
        if values.len() != omegas.len() {
            return Err(Error::InvalidParameter(format!("{} samples for {} grid points", values.len(), omegas.len())));
        }
        for p in [tail.re, tail.im] {
            if !(p.exponent >= 1.0) {
                return Err(Error::TailTooSlow(p.exponent));
            }
        }
        if omegas[0] < 0.0 || omegas.windows(2).any(|p| !(p[1] > p[0])) || omegas.iter().any(|w| !w.is_finite()) {
            return Err(Error::GridNotIncreasing);
        }
        Ok(Self { omegas, values, tail })
    }

    /// Samples `f` on `omegas`, taking the tail from the partial fractions when
    /// the caller has them or from the last two samples otherwise.
    pub fn sample(omegas: Vec<f64>, f: impl Fn(f64) -> Complex64, tail: Option<Tail>) -> Result<Self> {
        let values: Vec<Complex64> = omegas.iter().map(|&w| f(w)).collect();
        let tail = match tail {
            Some(t) => t,
            None => fitted_tail(&omegas, &values),
        };
        Self::new(omegas, values, tail)
    }

    /// Samples with the tail fitted to the last two points of each part.
    pub fn with_fitted_tail(omegas: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if omegas.len() < 2 || values.len() != omegas.len() {
            return Err(Error::GridTooShort { got: omegas.len().min(values.len()), need: MIN_GRID_POINTS });
        }
        let tail = fitted_tail(&omegas, &values);
        Self::new(omegas, values, tail)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }
}

fn fitted_tail(w: &[f64], v: &[Complex64]) -> Tail {
    let re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let im: Vec<f64> = v.iter().map(|c| c.im).collect();
    let fallback = |f: &[f64]| PowerLaw { exponent: 1.0, coefficient: f[f.len() - 1] * w[w.len() - 1] };
    Tail {
        re: PowerLaw::fit(w, &re).unwrap_or_else(|| fallback(&re)),
        im: PowerLaw::fit(w, &im).unwrap_or_else(|| fallback(&im)),
    }
}

/// Grid on `[0, omega_max]` whose density follows a Lorentzian around each
/// `(ω_0, γ)` plus a uniform floor, half of the points going to each.
pub fn refined_grid(omega_max: f64, n_points: usize, resonances: &[(f64, f64)]) -> Vec<f64> {
    let inside: Vec<(f64, f64)> =
        resonances.iter().copied().filter(|&(w0, g)| g > 0.0 && w0 > 0.0 && w0 - 10.0 * g < omega_max).collect();
    let lorentz_cdf = |w: f64, w0: f64, g: f64| (((w - w0) / g).atan() + (w0 / g).atan()) / PI;
    let cdf = |w: f64| {
        let mut c = 0.5 * w / omega_max;
        if !inside.is_empty() {
            let weight = 0.5 / inside.len() as f64;
            for &(w0, g) in &inside {
                c += weight * lorentz_cdf(w, w0, g) / lorentz_cdf(omega_max, w0, g);
            }
        } else {
            c *= 2.0;
        }
        c
    };
    let mut grid = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let u = i as f64 / (n_points - 1) as f64;
        let (mut lo, mut hi) = (0.0, omega_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        grid.push(if i == 0 {
            0.0
        } else if i + 1 == n_points {
            omega_max
        } else {
            0.5 * (lo + hi)
        });
    }
    grid.dedup_by(|a, b| *a <= *b);
    grid
}

/// Tail estimate for transformed data, floored at `1/ω`.
fn derived_tail(w: &[f64], f: &[f64]) -> PowerLaw {
    match PowerLaw::fit(w, f) {
        Some(p) if p.exponent >= 1.0 => p,
        _ => PowerLaw { exponent: 1.0, coefficient: f[f.len() - 1] * w[w.len() - 1] },
    }
}

/// Resonance list `(ω_eg, γ_e)` of a model, for grid refinement.
pub fn resonances(model: &MediumModel) -> Vec<(f64, f64)> {
    model.transitions.iter().map(|t| (t.omega_eg, t.gamma_e)).collect()
}

fn trapezoid(w: &[f64], f: &[f64]) -> f64 {
    w.windows(2).zip(f.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn interpolate(w: &[f64], f: &[f64], x: f64) -> (f64, f64) {
    // value and slope by linear interpolation, clamped to the grid
    let n = w.len();
    let i = match w.partition_point(|&v| v <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let slope = (f[i + 1] - f[i]) / (w[i + 1] - w[i]);
    (f[i] + slope * (x - w[i]), slope)
}

/// Samples extended to `ω = 0` with the value forced by the symmetry.
fn with_origin(w: &[f64], f: &[f64], odd: bool) -> (Vec<f64>, Vec<f64>) {
    if w[0] == 0.0 {
        let mut f = f.to_vec();
        if odd {
            f[0] = 0.0;
        }
        return (w.to_vec(), f);
    }
    let mut ww = Vec::with_capacity(w.len() + 1);
    let mut ff = Vec::with_capacity(w.len() + 1);
    ww.push(0.0);
    ff.push(if odd { 0.0 } else { f[0] });
    ww.extend_from_slice(w);
    ff.extend_from_slice(f);
    (ww, ff)
}

/// `P∫_0^Ω f(ω')/(ω' - x) dω'` by subtracting `f(x)`, for `0 < x < Ω`.
fn principal_value(w: &[f64], f: &[f64], x: f64) -> f64 {
    let (fx, slope) = interpolate(w, f, x);
    let h: Vec<f64> = w
        .iter()
        .zip(f.iter())
        .map(|(&wi, &fi)| {
            let d = wi - x;
            if d.abs() <= 1e-14 * x.max(1.0) {
                slope
            } else {
                (fi - fx) / d
            }
        })
        .collect();
    let omega = w[w.len() - 1];
    trapezoid(w, &h) + fx * ((omega - x) / (x - w[0]).max(f64::MIN_POSITIVE)).ln()
}

/// `Σ_j x^{2j} Ω^{-(p+2j)}/(p+2j)` = `∫_Ω^∞ ω'^{1-p}/(ω'² - x²) dω'` scaled by
/// `Ω`-powers; converges for `x < Ω`.
fn tail_series(p: f64, x: f64, omega: f64) -> f64 {
    let r2 = (x / omega).powi(2);
    let mut term_scale = omega.powf(-p);
    let mut sum = 0.0;
    for j in 0..200_000 {
        let t = term_scale / (p + 2.0 * j as f64);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
        term_scale *= r2;
    }
    sum
}

fn edge_clamp(x: f64, omega: f64) -> f64 {
    x.min(omega * (1.0 - 1e-3))
}

/// `Re χ(x) = (2/π) P∫_0^∞ ω' Im χ(ω')/(ω'² - x²) dω'` at any real `x`.
pub fn kk_real_at(tab: &TabulatedResponse, x: f64) -> Result<f64> {
    let tail = tab.tail.im;
    if tail.exponent < 1.0 {
        return Err(Error::TailTooSlow(tail.exponent));
    }
    let (w, g) = with_origin(&tab.omegas, &tab.im(), true);
    let omega = w[w.len() - 1];
    let x = edge_clamp(x.abs(), omega);
    if x == 0.0 {
        // (2/π)∫ Im χ/ω', the integrand tending to the slope at the origin
        let h: Vec<f64> = w
            .iter()
            .zip(g.iter())
            .enumerate()
            .map(|(i, (&wi, &gi))| if i == 0 { (g[1] - g[0]) / (w[1] - w[0]) } else { gi / wi })
            .collect();
        let t = tail.coefficient * omega.powf(-tail.exponent) / tail.exponent;
        return Ok(2.0 / PI * (trapezoid(&w, &h) + t));
    }
    let plus: Vec<f64> = w.iter().zip(g.iter()).map(|(&wi, &gi)| gi / (wi + x)).collect();
    let numeric = (principal_value(&w, &g, x) + trapezoid(&w, &plus)) / PI;
    let t = 2.0 / PI * tail.coefficient * tail_series(tail.exponent, x, omega);
    Ok(numeric + t)
}

/// `Im χ(x) = -(2x/π) P∫_0^∞ Re χ(ω')/(ω'² - x²) dω'` at any real `x`; odd in `x`.
pub fn kk_imag_at(tab: &TabulatedResponse, x: f64) -> Result<f64> {
    let tail = tab.tail.re;
    if tail.exponent < 1.0 {
        return Err(Error::TailTooSlow(tail.exponent));
    }
    let (w, f) = with_origin(&tab.omegas, &tab.re(), false);
    let omega = w[w.len() - 1];
    let sign = x.signum();
    let x = edge_clamp(x.abs(), omega);
    if x == 0.0 {
        return Ok(0.0);
    }
    let plus: Vec<f64> = w.iter().zip(f.iter()).map(|(&wi, &fi)| fi / (wi + x)).collect();
    let numeric = -(principal_value(&w, &f, x) - trapezoid(&w, &plus)) / PI;
    let t = -2.0 * x / PI * tail.coefficient * tail_series(tail.exponent + 1.0, x, omega);
    Ok(sign * (numeric + t))
}

/// Real part reconstructed from the imaginary part on the same grid.
pub fn kk_real_from_imag(tab: &TabulatedResponse) -> Result<TabulatedResponse> {
    let re: Vec<f64> = tab.omegas.iter().map(|&x| kk_real_at(tab, x)).collect::<Result<_>>()?;
    let im = tab.im();
    let im_tail = tab.tail.im;
    let re_tail = if im_tail.exponent > 2.0 {
        // Re χ → -(2/πω²) ∫ ω' Im χ dω'
        let (w, g) = with_origin(&tab.omegas, &im, true);
        let wg: Vec<f64> = w.iter().zip(g.iter()).map(|(a, b)| a * b).collect();
        let omega = w[w.len() - 1];
        let m1 =
            trapezoid(&w, &wg) + im_tail.coefficient * omega.powf(2.0 - im_tail.exponent) / (im_tail.exponent - 2.0);
        PowerLaw { exponent: 2.0, coefficient: -2.0 / PI * m1 }
    } else {
        derived_tail(&tab.omegas, &re)
    };
    let values = re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect();
    TabulatedResponse::new(tab.omegas.clone(), values, Tail { re: re_tail, im: im_tail })
}

/// Imaginary part reconstructed from the real part on the same grid.
pub fn kk_imag_from_real(tab: &TabulatedResponse) -> Result<TabulatedResponse> {
    let im: Vec<f64> = tab.omegas.iter().map(|&x| kk_imag_at(tab, x)).collect::<Result<_>>()?;
    let re = tab.re();
    let im_tail = derived_tail(&tab.omegas, &im);
    let values = re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect();
    TabulatedResponse::new(tab.omegas.clone(), values, Tail { re: tab.tail.re, im: im_tail })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticIdentity {
    /// `χ(0)`
    pub lhs: f64,
    /// `(2/π)∫_0^∞ Im χ(ω)/ω dω`
    pub rhs: f64,
    /// `χ(∞)`, zero for a sum-rule-closed model
    pub chi_infinity: f64,
    /// `|rhs - (lhs - χ(∞))|/|lhs - χ(∞)|`
    pub residual: f64,
    /// The model is not sum-rule closed, so `χ(∞) ≠ 0` and the integral
    /// reproduces `χ(0) - χ(∞)` rather than `χ(0)`.
    pub tail_warning: bool,
}

/// Evaluates the static identity on a resonance-refined grid, adding each
/// pole's contribution beyond `omega_max` in closed form.
pub fn kk_static_identity(model: &MediumModel, omega_max: f64, n_points: usize) -> Result<StaticIdentity> {
    if n_points < MIN_GRID_POINTS {
        return Err(Error::GridTooShort { got: n_points, need: MIN_GRID_POINTS });
    }
    if !(omega_max > 0.0) {
        return Err(Error::InvalidParameter(format!("omega_max must be positive (got {omega_max})")));
    }
    let lhs = model.static_limits()?.chi0;
    if model.is_vacuum() {
        return Ok(StaticIdentity { lhs, rhs: 0.0, chi_infinity: 0.0, residual: 0.0, tail_warning: false });
    }
    let poles = model.pole_expansion()?.chi;
    let grid = refined_grid(omega_max, n_points, &resonances(model));
    let f: Vec<f64> = grid
        .iter()
        .map(|&w| {
            if w == 0.0 {
                let h = 1e-7 * omega_max;
                model.chi(h).im / h
            } else {
                model.chi(w).im / w
            }
        })
        .collect();
    let rhs = 2.0 / PI * (trapezoid(&grid, &f) + poles.im_over_omega_tail(omega_max));
    let chi_infinity = model.chi_infinity();
    let target = lhs - chi_infinity;
    let residual = if target != 0.0 { (rhs - target).abs() / target.abs() } else { rhs.abs() };
    Ok(StaticIdentity { lhs, rhs, chi_infinity, residual, tail_warning: chi_infinity.abs() > 1e-12 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassivityReport {
    pub min_im_epsmu: f64,
    pub min_im_epsmu_at: f64,
    pub min_im_mu: f64,
    /// Disjoint, ordered intervals where `Im μ < 0`.
    pub negative_im_mu_intervals: Vec<(f64, f64)>,
    pub kk_static_residual: f64,
}

impl PassivityReport {
    pub fn interval_containing(&self, omega: f64) -> Option<(f64, f64)> {
        self.negative_im_mu_intervals.iter().copied().find(|&(a, b)| a <= omega && omega <= b)
    }
}

/// Scans `Im μ` and `Im(εμ)` over `grid` plus points clustered within a few
/// linewidths of every resonance. Sign changes of `Im μ` are bisected to 1e-6.
pub fn passivity_scan(model: &MediumModel, grid: &[f64]) -> Result<PassivityReport> {
    let lo = grid.iter().copied().filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(0.0, f64::max);
    if !(lo < hi) {
        return Err(Error::GridNotIncreasing);
    }
    let mut pts: Vec<f64> = grid.iter().copied().filter(|w| *w > 0.0).collect();
    for t in &model.transitions {
        for j in -200..=200 {
            let w = t.omega_eg + j as f64 * t.gamma_e / 20.0;
            if w >= lo && w <= hi {
                pts.push(w);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    let im_mu = |w: f64| model.mu(w).map(|m| m.im);
    let im_epsmu = |w: f64| model.mu(w).map(|m| (model.epsilon(w) * m).im);

    let mut min_v = f64::INFINITY;
    let mut min_i = 0;
    let mut min_mu = f64::INFINITY;
    let mut signs = Vec::with_capacity(pts.len());
    for (i, &w) in pts.iter().enumerate() {
        let v = im_epsmu(w)?;
        if v < min_v {
            min_v = v;
            min_i = i;
        }
        let m = im_mu(w)?;
        min_mu = min_mu.min(m);
        signs.push(m < 0.0);
    }
    // golden-section polish between the neighbours of the grid minimum
    let (mut a, mut b) = (pts[min_i.saturating_sub(1)], pts[(min_i + 1).min(pts.len() - 1)]);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut min_at = pts[min_i];
    for _ in 0..100 {
        if b - a < 1e-10 * b.max(1.0) {
            break;
        }
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if im_epsmu(c)? < im_epsmu(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let polished = 0.5 * (a + b);
    let pv = im_epsmu(polished)?;
    if pv < min_v {
        min_v = pv;
        min_at = polished;
    }

    let bisect = |mut a: f64, mut b: f64| -> Result<f64> {
        // a and b straddle a sign change of Im μ
        let sa = im_mu(a)? < 0.0;
        while b - a > 1e-6 {
            let m = 0.5 * (a + b);
            if (im_mu(m)? < 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let mut intervals = Vec::new();
    let mut start: Option<f64> = if signs[0] { Some(pts[0]) } else { None };
    for i in 1..pts.len() {
        match (signs[i - 1], signs[i]) {
            (false, true) => start = Some(bisect(pts[i - 1], pts[i])?),
            (true, false) => {
                let end = bisect(pts[i - 1], pts[i])?;
                intervals.push((start.take().unwrap_or(pts[0]), end));
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        intervals.push((s, pts[pts.len() - 1]));
    }

    let kk_static_residual = if model.is_vacuum() { 0.0 } else { kk_static_identity(model, 50.0, 4096)?.residual };
    Ok(PassivityReport {
        min_im_epsmu: min_v,
        min_im_epsmu_at: min_at,
        min_im_mu: min_mu,
        negative_im_mu_intervals: intervals,
        kk_static_residual,
    })
}

/// `Σ_e [Δ_dia/ω_eg² + Δ_quad - Δ_dipoct]`, which must vanish for `μ(∞) = 1`.
pub fn mu_sum_rule_residual(model: &MediumModel) -> f64 {
    model.sum_rule_residual()
}

/// Strengths that enter the permeability sum rule, in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalStrengths {
    pub omega_eg: Ratio<i64>,
    pub d_dia: Ratio<i64>,
    pub d_quad: Ratio<i64>,
    pub d_dipoct: Ratio<i64>,
}

pub fn mu_sum_rule_residual_exact(rows: &[RationalStrengths]) -> Ratio<i64> {
    rows.iter()
        .map(|r| r.d_dia / (r.omega_eg * r.omega_eg) + r.d_quad - r.d_dipoct)
        .fold(Ratio::from_integer(0), |a, b| a + b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainReport {
    /// `max |χ(t)|` over `t < -Δt`
    pub pre_signal: f64,
    /// `max |χ(t)|` over `t > 0`
    pub post_signal: f64,
    pub dt: f64,
    /// `(t, χ(t))` ordered by time
    pub series: Vec<(f64, Complex64)>,
}

impl TimeDomainReport {
    pub fn ratio(&self) -> f64 {
        if self.post_signal == 0.0 {
            0.0
        } else {
            self.pre_signal / self.post_signal
        }
    }
}

/// Inverse transform of `χ` sampled on `n_points` frequencies spanning
/// `[-omega_max, omega_max)`.
pub fn time_domain_causality(model: &MediumModel, n_points: usize, omega_max: f64) -> Result<TimeDomainReport> {
    time_domain_of(|w| model.chi(w), model.chi_infinity(), n_points, omega_max)
}

/// Same as [`time_domain_causality`] for an arbitrary response given on `ω ≥ 0`.
pub fn time_domain_of(
    chi: impl Fn(f64) -> Complex64,
    chi_infinity: f64,
    n_points: usize,
    omega_max: f64,
) -> Result<TimeDomainReport> {
    if chi_infinity.abs() > 1e-9 {
        return Err(Error::NotDecaying(chi_infinity));
    }
    if n_points < MIN_GRID_POINTS || n_points % 2 != 0 {
        return Err(Error::GridTooShort { got: n_points, need: MIN_GRID_POINTS });
    }
    let dw = 2.0 * omega_max / n_points as f64;
    let mut buf: Vec<Complex64> = (0..n_points)
        .map(|k| {
            let w = -omega_max + k as f64 * dw;
            if w >= 0.0 {
                chi(w)
            } else {
                chi(-w).conj()
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n_points).process(&mut buf);
    let dt = 2.0 * PI / (n_points as f64 * dw);
    let mut series: Vec<(f64, Complex64)> = buf
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let idx = if n < n_points / 2 { n as f64 } else { n as f64 - n_points as f64 };
            let t = idx * dt;
            (t, v * (Complex64::new(0.0, omega_max * t)).exp() * (dw / (2.0 * PI)))
        })
        .collect();
    series.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let pre = series.iter().filter(|(t, _)| *t < -1.5 * dt).map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let post = series.iter().filter(|(t, _)| *t > 0.0).map(|(_, v)| v.norm()).fold(0.0, f64::max);
    Ok(TimeDomainReport { pre_signal: pre, post_signal: post, dt, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipole::TransitionStrengths;
    use crate::presets::{atom_like_box, single_dipole, strongly_diamagnetic, strongly_diamagnetic_rational};
    use crate::response::Provenance;

    const W0: f64 = 1.0;
    const G: f64 = 0.04;

    fn lorentzian(w: f64) -> Complex64 {
        1.0 / Complex64::new(W0 * W0 - w * w, -2.0 * w * G)
    }

    fn lorentzian_tab() -> TabulatedResponse {
        let grid = refined_grid(50.0, 4096, &[(W0, G)]);
        let tail = Tail {
            re: PowerLaw { exponent: 2.0, coefficient: -1.0 },
            im: PowerLaw { exponent: 3.0, coefficient: 2.0 * G },
        };
        TabulatedResponse::sample(grid, lorentzian, Some(tail)).unwrap()
    }

    fn window_error(tab: &TabulatedResponse, part: impl Fn(Complex64) -> f64) -> f64 {
        let win: Vec<(f64, Complex64)> = tab
            .omegas()
            .iter()
            .zip(tab.values())
            .filter(|(w, _)| (**w - W0).abs() <= 5.0 * G)
            .map(|(w, v)| (*w, *v))
            .collect();
        assert!(win.len() > 50);
        let scale = win.iter().map(|(w, _)| part(lorentzian(*w)).abs()).fold(0.0, f64::max);
        win.iter().map(|(w, v)| (part(*v) - part(lorentzian(*w))).abs()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn lorentzian_real_part_from_imaginary() {
        let out = kk_real_from_imag(&lorentzian_tab()).unwrap();
        let err = window_error(&out, |c| c.re);
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn lorentzian_imaginary_part_from_real() {
        let out = kk_imag_from_real(&lorentzian_tab()).unwrap();
        let err = window_error(&out, |c| c.im);
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn zero_in_zero_out() {
        let grid: Vec<f64> = (0..128).map(|i| i as f64 * 0.1).collect();
        let tail =
            Tail { re: PowerLaw { exponent: 2.0, coefficient: 0.0 }, im: PowerLaw { exponent: 3.0, coefficient: 0.0 } };
        let tab = TabulatedResponse::sample(grid, |_| Complex64::new(0.0, 0.0), Some(tail)).unwrap();
        assert!(kk_real_from_imag(&tab).unwrap().values().iter().all(|v| v.norm() == 0.0));
        assert!(kk_imag_from_real(&tab).unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_real_part_is_rejected() {
        let grid: Vec<f64> = (1..=128).map(|i| i as f64 * 0.1).collect();
        let err = TabulatedResponse::sample(grid.clone(), |_| Complex64::new(1.0, 0.0), None).unwrap_err();
        assert!(matches!(err, Error::TailTooSlow(_)), "{err:?}");
        let tail =
            Tail { re: PowerLaw { exponent: 0.0, coefficient: 1.0 }, im: PowerLaw { exponent: 3.0, coefficient: 0.0 } };
        let values = vec![Complex64::new(1.0, 0.0); grid.len()];
        assert_eq!(TabulatedResponse::new(grid, values, tail).unwrap_err(), Error::TailTooSlow(0.0));
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let tail =
            Tail { re: PowerLaw { exponent: 2.0, coefficient: 0.0 }, im: PowerLaw { exponent: 3.0, coefficient: 0.0 } };
        let short: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(
            TabulatedResponse::new(short, vec![Complex64::new(0.0, 0.0); 10], tail).unwrap_err(),
            Error::GridTooShort { got: 10, need: 64 }
        );
        let mut flat: Vec<f64> = (0..100).map(|i| i as f64).collect();
        flat[50] = flat[49];
        assert_eq!(
            TabulatedResponse::new(flat, vec![Complex64::new(0.0, 0.0); 100], tail).unwrap_err(),
            Error::GridNotIncreasing
        );
    }

    #[test]
    fn imaginary_transform_is_odd() {
        let tab = lorentzian_tab();
        for x in [0.3, 0.97, 1.0, 1.1, 7.0] {
            let p = kk_imag_at(&tab, x).unwrap();
            let m = kk_imag_at(&tab, -x).unwrap();
            assert_eq!(p, -m);
            assert_eq!(kk_real_at(&tab, x).unwrap(), kk_real_at(&tab, -x).unwrap());
        }
        assert_eq!(kk_imag_at(&tab, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn round_trip_on_interior_half() {
        let tab = lorentzian_tab();
        let back = kk_imag_from_real(&kk_real_from_imag(&tab).unwrap()).unwrap();
        let n = tab.omegas().len();
        let scale = tab.im().iter().map(|v| v.abs()).fold(0.0, f64::max);
        for i in n / 4..3 * n / 4 {
            let want = tab.values()[i].im;
            let got = back.values()[i].im;
            assert!((got - want).abs() <= 2e-2 * want.abs().max(1e-3 * scale), "{} {got} {want}", tab.omegas()[i]);
        }
    }

    #[test]
    fn static_susceptibility_from_imaginary_part() {
        let model = strongly_diamagnetic();
        let grid = refined_grid(50.0, 4096, &resonances(&model));
        let tab = TabulatedResponse::sample(grid, |w| model.chi(w), None).unwrap();
        let chi0 = kk_real_at(&tab, 0.0).unwrap();
        assert!((chi0 + 63.0 / 64.0).abs() < 1e-2 * 63.0 / 64.0, "{chi0}");
    }

    #[test]
    fn static_identity_holds_with_diamagnetism() {
        let r = kk_static_identity(&strongly_diamagnetic(), 50.0, 4096).unwrap();
        assert!((r.lhs + 63.0 / 64.0).abs() < 1e-12);
        assert!(r.residual < 1e-2, "{r:?}");
        assert!(!r.tail_warning);
    }

    #[test]
    fn paramagnetic_integral_is_positive() {
        let t =
            |w, g, e, m| TransitionStrengths { omega_eg: w, gamma_e: g, d_edip: e, d_mdip: m, ..Default::default() };
        let model = MediumModel::new(
            vec![t(1.0, 0.1, 1.0, 0.2), t(2.5, 0.05, 0.0, 0.3)],
            1.0,
            Provenance::Phenomenological { label: "para".into() },
        )
        .unwrap();
        let r = kk_static_identity(&model, 50.0, 4096).unwrap();
        assert!(r.rhs > 0.0 && r.lhs > 0.0);
        assert!(r.residual < 1e-2, "{r:?}");
    }

    #[test]
    fn unclosed_model_carries_tail_warning() {
        let mut model = strongly_diamagnetic();
        model.transitions[0].d_dipoct = 0.0;
        assert!(kk_static_identity(&model, 50.0, 4096).unwrap().tail_warning);
    }

    #[test]
    fn static_identity_for_box_medium() {
        let model = atom_like_box(6).model().unwrap();
        let r = kk_static_identity(&model, 50.0, 4096).unwrap();
        assert!(r.residual < 1e-2, "{r:?}");
        // the truncated basis leaves a small χ(∞)
        assert!(r.tail_warning);
        assert!(r.chi_infinity.abs() < 0.1 * r.lhs.abs());
    }

    #[test]
    fn refinement_does_not_degrade_static_identity() {
        let model = strongly_diamagnetic();
        let res: Vec<f64> = [512, 1024, 2048, 4096, 8192]
            .iter()
            .map(|&n| kk_static_identity(&model, 50.0, n).unwrap().residual)
            .collect();
        for p in res.windows(2) {
            assert!(p[1] <= 1.1 * p[0] + 1e-12, "{res:?}");
        }
    }

    #[test]
    fn refined_grid_is_increasing_and_spans_range() {
        let g = refined_grid(50.0, 1000, &[(1.0, 0.18), (2.0, 0.05), (3.0, 0.04), (80.0, 1.0)]);
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 50.0);
        assert!(g.windows(2).all(|p| p[1] > p[0]));
        // half the points crowd the three resonances
        let near = g.iter().filter(|w| (0.5..3.5).contains(*w)).count();
        assert!(near > 400, "{near}");
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn passivity_with_negative_im_mu() {
        let model = strongly_diamagnetic();
        let r = passivity_scan(&model, &log_grid(1e-4, 1e3, 20_000)).unwrap();
        assert!(r.min_im_epsmu > 0.0, "{r:?}");
        let hits = r.negative_im_mu_intervals.iter().filter(|(a, b)| *a <= 1.0 && 1.0 <= *b).count();
        assert_eq!(hits, 1, "{r:?}");
        assert!(r.negative_im_mu_intervals.windows(2).all(|p| p[0].1 < p[1].0));
        assert!(r.kk_static_residual < 1e-2);
    }

    #[test]
    fn dipole_only_medium_has_no_negative_interval() {
        let r = passivity_scan(&single_dipole(1.0, 1.0, 0.1), &log_grid(1e-3, 1e2, 2000)).unwrap();
        assert!(r.negative_im_mu_intervals.is_empty());
        assert!(r.min_im_epsmu > 0.0);
    }

    #[test]
    fn interval_endpoints_are_sign_changes() {
        let model = strongly_diamagnetic();
        let r = passivity_scan(&model, &log_grid(1e-4, 1e3, 20_000)).unwrap();
        for &(a, b) in &r.negative_im_mu_intervals {
            let mid = model.mu(0.5 * (a + b)).unwrap().im;
            assert!(mid < 0.0);
            if a > 1e-4 {
                assert!(model.mu(a - 1e-5).unwrap().im >= 0.0, "{a}");
            }
            if b < 1e3 {
                assert!(model.mu(b + 1e-5).unwrap().im >= 0.0, "{b}");
            }
        }
    }

    #[test]
    fn sum_rule_closes_exactly() {
        assert_eq!(mu_sum_rule_residual_exact(&strongly_diamagnetic_rational()), Ratio::from_integer(0));
        assert!(mu_sum_rule_residual(&strongly_diamagnetic()).abs() < 1e-14);
    }

    #[test]
    fn sum_rule_mutation_is_detected() {
        let mut rows = strongly_diamagnetic_rational();
        rows[0].d_dipoct = Ratio::from_integer(0);
        assert_eq!(mu_sum_rule_residual_exact(&rows), Ratio::new(65, 64));
        let mut model = strongly_diamagnetic();
        model.transitions[0].d_dipoct = 0.0;
        assert!((mu_sum_rule_residual(&model) - 65.0 / 64.0).abs() < 1e-14);
        let mu_inf = model.mu(1e7).unwrap();
        assert!((mu_inf - 1.0).norm() > 0.5);
    }

    #[test]
    fn box_sum_rule_shrinks() {
        let r: Vec<f64> =
            [4, 6, 8].iter().map(|&n| mu_sum_rule_residual(&atom_like_box(n).model().unwrap()).abs()).collect();
        assert!(r[0] > r[1] && r[1] > r[2] && r[2] > 0.0, "{r:?}");
    }

    #[test]
    fn time_domain_has_no_presignal() {
        let r = time_domain_causality(&strongly_diamagnetic(), 1 << 16, 200.0).unwrap();
        assert!(r.ratio() < 1e-3, "{} {}", r.pre_signal, r.post_signal);
        assert!(r.post_signal > 0.0);
    }

    #[test]
    fn single_lorentzian_matches_damped_sine() {
        let (w0, g) = (2.0, 0.1);
        let chi = |w: f64| 1.0 / Complex64::new(w0 * w0 - w * w, -2.0 * w * g);
        let r = time_domain_of(chi, 0.0, 1 << 16, 200.0).unwrap();
        let big_omega = (w0 * w0 - g * g).sqrt();
        let peak = 1.0 / big_omega;
        // the 1/ω² tail cut at ±W leaves 1/(πW) at t = 0 only; it vanishes at t = ±Δt since WΔt = π
        for &(t, v) in r.series.iter().filter(|(t, _)| t.abs() < 30.0 && *t != 0.0) {
            let want = if t > 0.0 { (-g * t).exp() * (big_omega * t).sin() / big_omega } else { 0.0 };
            assert!((v.re - want).abs() < 2e-3 * peak, "{t} {v} {want}");
            assert!(v.im.abs() < 1e-9);
        }
    }

    #[test]
    fn zero_response_transforms_to_zero() {
        let r = time_domain_of(|_| Complex64::new(0.0, 0.0), 0.0, 1024, 50.0).unwrap();
        assert_eq!(r.pre_signal, 0.0);
        assert_eq!(r.post_signal, 0.0);
        assert!(r.series.iter().all(|(_, v)| v.norm() == 0.0));
    }

    #[test]
    fn non_decaying_response_is_rejected() {
        let mut model = strongly_diamagnetic();
        model.transitions[0].d_dipoct = 0.0;
        assert!(matches!(time_domain_causality(&model, 4096, 200.0), Err(Error::NotDecaying(_))));
    }
}
