//! The verification suite behind `diamag verify`.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub};

use diamag::causality::{
    kk_static_identity, mu_sum_rule_residual, passivity_scan, refined_grid, resonances, time_domain_of,
    RationalStrengths,
};
use diamag::multipole::trk_residuals;
use diamag::polariton::{optical_sum_rule_residual, solve_branches};
use diamag::quantum_box::{enumerate_transitions, ground_expectations, BoxState};
use diamag::response::{BoxMedium, MediumModel};

use crate::config::{Mode, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub status: Status,
    pub name: String,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

struct Suite {
    lines: Vec<CheckLine>,
    scale: f64,
}

impl Suite {
    /// Records `measured ≤ threshold·scale`.
    fn at_most(&mut self, name: &str, measured: f64, threshold: f64) {
        let limit = threshold * self.scale;
        let pass = measured <= limit;
        self.lines.push(CheckLine {
            status: if pass { Status::Pass } else { Status::Fail },
            name: name.into(),
            detail: format!("measured {measured:.3e}, threshold {limit:.3e}"),
        });
    }

    fn condition(&mut self, name: &str, pass: bool, detail: String) {
        self.lines.push(CheckLine {
            status: if pass { Status::Pass } else { Status::Fail },
            name: name.into(),
            detail,
        });
    }

    fn fail(&mut self, name: &str, detail: String) {
        self.condition(name, false, detail);
    }

    fn info(&mut self, name: &str, detail: String) {
        self.lines.push(CheckLine { status: Status::Info, name: name.into(), detail });
    }
}

pub fn all_pass(lines: &[CheckLine]) -> bool {
    lines.iter().all(|l| l.status != Status::Fail)
}

/// Exact sum-rule residual, or `None` on 64-bit overflow.
fn exact_residual(rows: &[RationalStrengths]) -> Option<Ratio<i64>> {
    rows.iter().try_fold(Ratio::from_integer(0), |acc, r| {
        let w2 = r.omega_eg.checked_mul(&r.omega_eg)?;
        let term = r.d_dia.checked_div(&w2)?.checked_add(&r.d_quad)?.checked_sub(&r.d_dipoct)?;
        acc.checked_add(&term)
    })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// FFT size and band for the time-domain check: the band covers every line
/// four times over and the time window outlasts the slowest decay ~30-fold.
fn fft_plan(model: &MediumModel) -> (usize, f64) {
    let top = model.transitions.iter().map(|t| t.omega_eg).fold(0.0, f64::max);
    let slowest = model.transitions.iter().map(|t| t.gamma_e).fold(f64::INFINITY, f64::min);
    let band = (4.0 * top).max(200.0);
    let dw = std::f64::consts::PI * slowest / 30.0;
    let n = ((2.0 * band / dw).ceil() as usize).next_power_of_two().clamp(1 << 16, 1 << 22);
    (n, band)
}

/// Runs every check that applies to the scenario's mode.
pub fn run(
    cfg: &ScenarioConfig,
    model: &MediumModel,
    medium: Option<&BoxMedium>,
    tolerance_scale: f64,
) -> Vec<CheckLine> {
    let mut s = Suite { lines: Vec::new(), scale: tolerance_scale };
    let is_box = matches!(cfg.mode, Mode::Box(_));
    let grid = cfg.grid.points(&resonances(model));

    // reflection χ(-ω) = χ*(ω) and the constitutive identities
    let mut refl = 0.0f64;
    let mut consistency = 0.0f64;
    for &w in &grid {
        let c = model.chi(w);
        refl = refl.max((model.chi(-w) - c.conj()).norm() / c.norm().max(1.0));
        match model.mu(w) {
            Ok(mu) => consistency = consistency.max((1.0 - 1.0 / mu - c).norm() / c.norm().max(1.0)),
            Err(e) => {
                s.fail("constitutive consistency", e.to_string());
                return s.lines;
            }
        }
    }
    s.at_most("reflection symmetry chi(-w) = conj chi(w)", refl, 1e-12);
    s.at_most("consistency chi = 1 - 1/mu", consistency, 1e-12);

    let statics = match model.static_limits() {
        Ok(st) => st,
        Err(e) => {
            s.fail("static limit", e.to_string());
            return s.lines;
        }
    };
    s.info(
        "static limit",
        format!(
            "mu(0) = {:.12}, eps(0) = {:.12}, chi(0) = {:.6e} ({})",
            statics.mu0,
            statics.eps0,
            statics.chi0,
            if statics.chi0 < 0.0 {
                "diamagnetic"
            } else if statics.chi0 > 0.0 {
                "paramagnetic"
            } else {
                "inert"
            }
        ),
    );

    // permeability sum rule and the high-frequency limit
    let residual = mu_sum_rule_residual(model);
    let scale: f64 = model
        .transitions
        .iter()
        .map(|t| (t.d_dia / (t.omega_eg * t.omega_eg)).abs() + t.d_quad.abs() + t.d_dipoct.abs())
        .sum();
    if is_box {
        s.at_most(
            "sum rule (relative to its terms, truncated basis)",
            residual.abs() / scale.max(f64::MIN_POSITIVE),
            5e-2,
        );
    } else {
        s.at_most("sum rule residual", residual.abs(), 1e-12);
        if let Mode::Phenomenological(rows) = &cfg.mode {
            if let Some(exact) = rows.iter().map(|r| r.exact_sum_rule_terms()).collect::<Option<Vec<_>>>() {
                match exact_residual(&exact) {
                    Some(r) => s.info("sum rule in exact arithmetic", format!("residual = {r}")),
                    None => s.info("sum rule in exact arithmetic", "skipped, fractions overflow 64-bit".into()),
                }
            }
        }
    }
    let top = model.transitions.iter().map(|t| t.omega_eg).fold(1.0, f64::max);
    let far = 1e4 * top;
    match model.mu(far) {
        Ok(mu) => {
            let dev = (mu - 1.0).norm();
            if is_box {
                let rel = dev / (statics.mu0 - 1.0).abs().max(f64::MIN_POSITIVE);
                s.at_most(&format!("mu(inf) = 1, |mu({far:.0e}) - 1| relative to |mu(0) - 1|"), rel, 5e-2);
            } else {
                s.at_most(&format!("mu(inf) = 1, |mu({far:.0e}) - 1|"), dev, 1e-6);
            }
        }
        Err(e) => s.fail("mu(inf) = 1", e.to_string()),
    }

    if model.is_vacuum() {
        s.info("causality checks", "vacuum: chi = 0, nothing to transform".into());
    } else {
        match kk_static_identity(model, 50.0, 4096) {
            Ok(r) => {
                s.at_most(
                    &format!("KK static identity (lhs {:.9e}, rhs {:.9e})", r.lhs - r.chi_infinity, r.rhs),
                    r.residual,
                    1e-2,
                );
                if r.tail_warning {
                    s.info(
                        "KK tail",
                        format!(
                            "model is not sum-rule closed; compared chi(0) - chi(inf) with chi(inf) = {:.3e}",
                            r.chi_infinity
                        ),
                    );
                }
            }
            Err(e) => s.fail("KK static identity", e.to_string()),
        }

        let hi = cfg.grid.omega_max.max(1e3);
        let mut scan_grid = log_grid(1e-4, hi, 20_000);
        scan_grid.extend(refined_grid(hi, 4096, &resonances(model)).into_iter().filter(|&w| w > 0.0));
        scan_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        scan_grid.dedup();
        match passivity_scan(model, &scan_grid) {
            Ok(r) => {
                s.condition(
                    "passivity min Im(eps mu) > 0",
                    r.min_im_epsmu > 0.0,
                    format!("min Im(eps mu) = {:.4e} at w = {:.6} over (0, {hi}]", r.min_im_epsmu, r.min_im_epsmu_at),
                );
                if r.negative_im_mu_intervals.is_empty() {
                    s.info("negative Im mu", "none found".into());
                } else {
                    let list: Vec<String> =
                        r.negative_im_mu_intervals.iter().map(|(a, b)| format!("({a:.6}, {b:.6})")).collect();
                    s.info("negative Im mu interval found", list.join(", "));
                }
            }
            Err(e) => s.fail("passivity scan", e.to_string()),
        }

        let (n, band) = fft_plan(model);
        let chi_inf = model.chi_infinity();
        if chi_inf.abs() > 1e-12 {
            s.info("time domain", format!("instantaneous part chi(inf) = {chi_inf:.3e} removed before transforming"));
        }
        match time_domain_of(|w| model.chi(w) - chi_inf, 0.0, n, band) {
            Ok(r) => s.at_most(
                &format!("time-domain causality max|chi(t<-dt)|/max|chi(t>0)| ({n} points on [-{band:.1}, {band:.1}])"),
                r.ratio(),
                1e-3,
            ),
            Err(e) => s.fail("time-domain causality", e.to_string()),
        }
    }

    match solve_branches(model, &cfg.polariton.k, cfg.polariton.gamma_scale) {
        Ok(sol) => {
            for &k in &cfg.polariton.k {
                match optical_sum_rule_residual(&sol, model, k) {
                    Ok(r) if r.reliable => s.at_most(
                        &format!("optical sum rule at k = {k} ({} branches)", r.roots),
                        r.residual.abs(),
                        1e-2,
                    ),
                    Ok(r) => s.fail(
                        &format!("optical sum rule at k = {k}"),
                        format!(
                            "incomplete branch set: {} of {} roots, residual {:.3e} unreliable",
                            r.roots, r.expected, r.residual
                        ),
                    ),
                    Err(e) => s.fail(&format!("optical sum rule at k = {k}"), e.to_string()),
                }
            }
            for f in &sol.failures {
                s.info(
                    "branch bracketing",
                    format!("k = {}, interval ({:.6}, {:.6}): {}", f.k, f.interval.0, f.interval.1, f.reason),
                );
            }
        }
        Err(e) => s.fail("polariton branches", e.to_string()),
    }

    if let Some(b) = medium {
        match enumerate_transitions(b.n_max, &b.geometry) {
            Ok(list) => {
                let ms: Vec<_> = list.into_iter().map(|(_, m)| m).collect();
                let gt = ground_expectations(BoxState::ground(), &b.geometry);
                match trk_residuals(&ms, &gt, &b.geometry) {
                    Ok(r) => {
                        s.at_most(
                            &format!("TRK dipole diagonal residual (n_max = {})", b.n_max),
                            r.dipole_diagonal,
                            5e-2,
                        );
                        s.info(
                            "TRK higher-order residuals",
                            format!(
                                "dipole {:.3e}, octupole {:.3e}, quadrupole {:.3e}",
                                r.dipole, r.octupole, r.quadrupole
                            ),
                        );
                    }
                    Err(e) => s.fail("TRK residuals", e.to_string()),
                }
            }
            Err(e) => s.fail("TRK residuals", e.to_string()),
        }
    }
    s.lines
}
