use std::path::{Path, PathBuf};

use diamag::causality::resonances;
use diamag::polariton::{optical_sum_rule_residual, solve_branches};
use diamag::response::{BoxMedium, MediumModel, Provenance};

use crate::cache::{self, CachedRow, Lookup};
use crate::config::{self, Mode, ScenarioConfig};
use crate::dataset::{branch_table, response_table, write_atomic};
use crate::verify;
use crate::CliError;

pub const CACHE_FILE: &str = "moments.cache";
const POLARITON_TOLERANCE: f64 = 1e-2;

/// Settings shared by every subcommand.
pub struct Common {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub n_max: Option<u32>,
}

pub struct Scenario {
    pub config: PathBuf,
    pub cfg: ScenarioConfig,
    pub out_dir: PathBuf,
}

pub fn load(common: &Common) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|source| CliError::Io { path: common.config.clone(), source })?;
    let mut cfg = config::parse(&text).map_err(|e| CliError::Config { path: common.config.clone(), source: e })?;
    if let Some(n) = common.n_max {
        match &mut cfg.mode {
            Mode::Box(b) => b.n_max = n,
            _ => return Err(CliError::Usage("--n-max only applies to box mode".into())),
        }
        if n < 2 {
            return Err(CliError::Usage(format!("--n-max must be at least 2 (got {n})")));
        }
    }
    let out_dir = common.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    Ok(Scenario { config: common.config.clone(), cfg, out_dir })
}

fn box_rows(medium: &BoxMedium) -> Result<Vec<CachedRow>, CliError> {
    Ok(medium.transitions()?.into_iter().map(|t| CachedRow { state: t.state, strengths: t.strengths }).collect())
}

/// Box strengths, read from the cache when its geometry hash matches and
/// recomputed (and rewritten) otherwise.
fn cached_box_rows(medium: &BoxMedium, out_dir: &Path) -> Result<Vec<CachedRow>, CliError> {
    let path = out_dir.join(CACHE_FILE);
    match cache::load(&path, medium)? {
        Lookup::Hit(rows) => return Ok(rows),
        Lookup::Stale(why) => eprintln!("note: {} is stale ({why}), recomputing", path.display()),
        Lookup::Missing => {}
    }
    let rows = box_rows(medium)?;
    write_atomic(&path, &cache::render(medium, &rows))?;
    Ok(rows)
}

fn box_model(medium: &BoxMedium, rows: &[CachedRow]) -> Result<MediumModel, CliError> {
    let transitions = rows
        .iter()
        .map(|r| {
            let mut t = r.strengths;
            t.gamma_e = medium.gamma_e;
            t
        })
        .collect();
    Ok(MediumModel::new(
        transitions,
        medium.plasma_frequency(),
        Provenance::Box { geometry: medium.geometry, density: medium.density, n_max: medium.n_max },
    )?)
}

pub fn build_model(s: &Scenario) -> Result<MediumModel, CliError> {
    let model = match &s.cfg.mode {
        Mode::Phenomenological(rows) => {
            let label = s.config.display().to_string();
            MediumModel::new(rows.iter().map(|r| r.strengths()).collect(), 1.0, Provenance::Phenomenological { label })?
        }
        Mode::Box(b) => box_model(b, &cached_box_rows(b, &s.out_dir)?)?,
        Mode::Vacuum => MediumModel::vacuum(),
    };
    Ok(model.with_damping(s.cfg.damping))
}

pub fn respond(s: &Scenario) -> Result<bool, CliError> {
    let model = build_model(s)?;
    let samples =
        s.cfg.grid.points(&resonances(&model)).into_iter().map(|w| model.sample(w)).collect::<Result<Vec<_>, _>>()?;
    let path = s.out_dir.join("response.csv");
    write_atomic(&path, &response_table(&samples))?;
    println!("wrote {} ({} rows)", path.display(), samples.len());
    Ok(true)
}

pub fn verify(s: &Scenario, tolerance_scale: f64) -> Result<bool, CliError> {
    if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
        return Err(CliError::Usage(format!("--tolerance-scale must be positive (got {tolerance_scale})")));
    }
    let model = build_model(s)?;
    let medium = match &s.cfg.mode {
        Mode::Box(b) => Some(b),
        _ => None,
    };
    let lines = verify::run(&s.cfg, &model, medium, tolerance_scale);
    let mut text = String::new();
    for l in &lines {
        println!("{l}");
        text.push_str(&l.to_string());
        text.push('\n');
    }
    write_atomic(&s.out_dir.join("verify.txt"), &text)?;
    Ok(verify::all_pass(&lines))
}

pub fn box_cache(s: &Scenario) -> Result<bool, CliError> {
    let Mode::Box(medium) = &s.cfg.mode else {
        return Err(CliError::Usage(format!(
            "the box command needs a [box] section, config is in {} mode",
            s.cfg.mode.name()
        )));
    };
    let rows = box_rows(medium)?;
    let path = s.out_dir.join(CACHE_FILE);
    write_atomic(&path, &cache::render(medium, &rows))?;
    println!("wrote {} ({} transitions, n_max = {})", path.display(), rows.len(), medium.n_max);
    Ok(true)
}

pub fn polariton(s: &Scenario, gamma_scale: Option<f64>) -> Result<bool, CliError> {
    let model = build_model(s)?;
    let scale = gamma_scale.unwrap_or(s.cfg.polariton.gamma_scale);
    eprintln!("note: damped roots use linewidths scaled by gamma_scale = {scale}");
    let sol = solve_branches(&model, &s.cfg.polariton.k, scale)?;
    let path = s.out_dir.join("branches.csv");
    write_atomic(&path, &branch_table(&sol, &model))?;
    println!("wrote {} ({} branches)", path.display(), sol.branches.len());

    let mut ok = true;
    for f in &sol.failures {
        ok = false;
        eprintln!("bracket failure at k = {}: ({}, {}) {}", f.k, f.interval.0, f.interval.1, f.reason);
    }
    for &k in &s.cfg.polariton.k {
        let r = optical_sum_rule_residual(&sol, &model, k)?;
        if !r.reliable {
            ok = false;
            eprintln!("k = {k}: found {} of {} branches, sum rule not evaluated", r.roots, r.expected);
        } else if r.residual.abs() > POLARITON_TOLERANCE {
            ok = false;
            eprintln!("k = {k}: optical sum rule residual {:.3e} exceeds {POLARITON_TOLERANCE}", r.residual);
        } else {
            println!("k = {k}: {} branches, optical sum rule residual {:.3e}", r.roots, r.residual);
        }
    }
    Ok(ok)
}
