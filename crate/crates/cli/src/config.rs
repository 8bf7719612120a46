//! Scenario files.
//!
//! ```text
//! # comment
//! mode = phenomenological        # or: box, vacuum
//!
//! [model]
//! damping = balanced             # printed | shifted | balanced
//!
//! [transition]                   # repeat once per transition
//! omega = 1
//! gamma = 0.18
//! edip = 2
//! mdip = 0
//! quad = 0
//! dipoct = 65/64
//! dia = 0
//!
//! [box]
//! lx = 0.2/(2*pi)
//! ly = 0.4/(2*pi)
//! lz = 0.2/(2*pi)
//! mass = 500
//! charge = 1/sqrt(32)
//! density = 16000
//! gamma = 0.15
//! n_max = 6
//!
//! [grid]
//! omega_min = 0
//! omega_max = 10
//! n_points = 2001
//! spacing = linear               # linear | log | refined
//!
//! [polariton]
//! k = 1, 10, 100
//! gamma_scale = 1/100
//!
//! [output]
//! dir = out
//! ```
//!
//! Numbers may be decimals, fractions `p/q` or expressions with `pi` and
//! `sqrt`; see [`crate::expr`]. Transition values are in units of `ω_p`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use diamag::multipole::TransitionStrengths;
use diamag::quantum_box::BoxGeometry;
use diamag::response::{BoxMedium, DampingForm};

use crate::expr::{parse_value, Rational, Value};

pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn at<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line: Some(line), message: message.into() })
}

fn whole<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line: None, message: message.into() })
}

/// One `[transition]` row, kept exact where the file was.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub line: usize,
    pub omega: Value,
    pub gamma: Value,
    pub edip: Value,
    pub mdip: Value,
    pub quad: Value,
    pub dipoct: Value,
    pub dia: Value,
}

impl TransitionRow {
    pub fn strengths(&self) -> TransitionStrengths {
        TransitionStrengths {
            omega_eg: self.omega.float,
            gamma_e: self.gamma.float,
            d_edip: self.edip.float,
            d_quad: self.quad.float,
            d_mdip: self.mdip.float,
            d_dia: self.dia.float,
            d_dipoct: self.dipoct.float,
        }
    }

    /// Sum-rule inputs in exact arithmetic, if every one was written exactly.
    pub fn exact_sum_rule_terms(&self) -> Option<diamag::causality::RationalStrengths> {
        Some(diamag::causality::RationalStrengths {
            omega_eg: self.omega.exact?,
            d_dia: self.dia.exact?,
            d_quad: self.quad.exact?,
            d_dipoct: self.dipoct.exact?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Phenomenological(Vec<TransitionRow>),
    Box(BoxMedium),
    Vacuum,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Phenomenological(_) => "phenomenological",
            Mode::Box(_) => "box",
            Mode::Vacuum => "vacuum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self, resonances: &[(f64, f64)]) -> Vec<f64> {
        let (a, b, n) = (self.omega_min, self.omega_max, self.n_points);
        match self.spacing {
            Spacing::Linear => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            Spacing::Log => (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect(),
            Spacing::Refined => {
                // refine on [0, b] and keep what lies inside [a, b]
                let mut extra = n;
                loop {
                    let g: Vec<f64> =
                        diamag::causality::refined_grid(b, extra, resonances).into_iter().filter(|&w| w >= a).collect();
                    if g.len() >= n || extra > 64 * n {
                        return g;
                    }
                    extra *= 2;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonSpec {
    pub k: Vec<f64>,
    pub gamma_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub damping: DampingForm,
    pub grid: GridSpec,
    pub polariton: PolaritonSpec,
    pub out_dir: PathBuf,
}

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

fn allowed_keys(section: &str) -> Option<&'static [&'static str]> {
    Some(match section {
        "" => &["mode"],
        "model" => &["damping"],
        "transition" => &["omega", "gamma", "edip", "mdip", "quad", "dipoct", "dia"],
        "box" => &["lx", "ly", "lz", "mass", "charge", "density", "gamma", "n_max"],
        "grid" => &["omega_min", "omega_max", "n_points", "spacing"],
        "polariton" => &["k", "gamma_scale"],
        "output" => &["dir"],
        _ => return None,
    })
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections = vec![Section { name: String::new(), line: 0, entries: BTreeMap::new() }];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return at(line, format!("unterminated section header '{content}'"));
            };
            let name = name.trim().to_ascii_lowercase();
            if allowed_keys(&name).is_none() || name.is_empty() {
                return at(line, format!("unknown section [{name}]"));
            }
            if name != "transition" && sections.iter().any(|s| s.name == name) {
                return at(line, format!("section [{name}] appears twice"));
            }
            sections.push(Section { name, line, entries: BTreeMap::new() });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return at(line, format!("expected 'key = value', found '{content}'"));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        let section = sections.last_mut().expect("root section");
        let allowed = allowed_keys(&section.name).expect("known section");
        if !allowed.contains(&key.as_str()) {
            let place = if section.name.is_empty() { "top level".to_string() } else { format!("[{}]", section.name) };
            return at(line, format!("unknown key '{key}' in {place} (expected one of: {})", allowed.join(", ")));
        }
        if value.is_empty() {
            return at(line, format!("'{key}' has no value"));
        }
        if let Some((first, _)) = section.entries.get(&key) {
            return at(line, format!("'{key}' already set on line {first}"));
        }
        section.entries.insert(key, (line, value));
    }
    Ok(sections)
}

fn number(entries: &BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<(usize, Value)>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some((line, text)) => match parse_value(text) {
            Ok(v) => Ok(Some((*line, v))),
            Err(e) => at(*line, format!("'{key}': {e}")),
        },
    }
}

fn required(section: &Section, key: &str) -> Result<(usize, Value), ConfigError> {
    match number(&section.entries, key)? {
        Some(v) => Ok(v),
        None => at(section.line, format!("[{}] is missing '{key}'", section.name)),
    }
}

fn positive(section: &Section, key: &str) -> Result<f64, ConfigError> {
    let (line, v) = required(section, key)?;
    if v.float <= 0.0 {
        return at(line, format!("'{key}' must be positive (got {})", v.float));
    }
    Ok(v.float)
}

fn integer(line: usize, key: &str, v: Value, min: i64) -> Result<i64, ConfigError> {
    match v.exact {
        Some(r) if r.is_integer() && *r.numer() >= min => Ok(*r.numer()),
        _ => at(line, format!("'{key}' must be an integer ≥ {min}")),
    }
}

fn transition(section: &Section) -> Result<TransitionRow, ConfigError> {
    let zero = Value { exact: Some(Rational::from_integer(0)), float: 0.0 };
    let opt =
        |key: &str| -> Result<Value, ConfigError> { Ok(number(&section.entries, key)?.map(|x| x.1).unwrap_or(zero)) };
    let (wl, omega) = required(section, "omega")?;
    if omega.float <= 0.0 {
        return at(wl, format!("'omega' must be positive (got {})", omega.float));
    }
    let (gl, gamma) = required(section, "gamma")?;
    if gamma.float <= 0.0 {
        return at(gl, format!("'gamma' must be positive (got {})", gamma.float));
    }
    Ok(TransitionRow {
        line: section.line,
        omega,
        gamma,
        edip: opt("edip")?,
        mdip: opt("mdip")?,
        quad: opt("quad")?,
        dipoct: opt("dipoct")?,
        dia: opt("dia")?,
    })
}

fn box_medium(section: &Section) -> Result<BoxMedium, ConfigError> {
    let lengths = [positive(section, "lx")?, positive(section, "ly")?, positive(section, "lz")?];
    let mass = positive(section, "mass")?;
    let (cl, charge) = required(section, "charge")?;
    if charge.float == 0.0 {
        return at(cl, "'charge' must be non-zero");
    }
    let density = positive(section, "density")?;
    let gamma = positive(section, "gamma")?;
    let (nl, n) = required(section, "n_max")?;
    let n_max = integer(nl, "n_max", n, 2)?;
    let geometry =
        BoxGeometry::new(lengths, mass, charge.float).or_else(|e| at(section.line, format!("invalid box: {e}")))?;
    Ok(BoxMedium { geometry, density, gamma_e: gamma, n_max: n_max as u32 })
}

/// Parses a scenario. `text` is the whole file.
pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let sections = split_sections(text)?;
    let root = &sections[0];
    let Some((mode_line, mode_name)) = root.entries.get("mode") else {
        return whole("missing top-level 'mode' (phenomenological, box or vacuum)");
    };
    let transitions: Vec<&Section> = sections.iter().filter(|s| s.name == "transition").collect();
    let box_section = sections.iter().find(|s| s.name == "box");
    let mode = match mode_name.to_ascii_lowercase().as_str() {
        "phenomenological" => {
            if let Some(b) = box_section {
                return at(b.line, "[box] is not used in phenomenological mode");
            }
            if transitions.is_empty() {
                return at(*mode_line, "phenomenological mode needs at least one [transition]");
            }
            Mode::Phenomenological(transitions.iter().map(|s| transition(s)).collect::<Result<_, _>>()?)
        }
        "box" => {
            if let Some(t) = transitions.first() {
                return at(t.line, "[transition] is not used in box mode");
            }
            match box_section {
                Some(b) => Mode::Box(box_medium(b)?),
                None => return at(*mode_line, "box mode needs a [box] section"),
            }
        }
        "vacuum" => {
            if let Some(s) = transitions.first().copied().or(box_section) {
                return at(s.line, format!("[{}] is not used in vacuum mode", s.name));
            }
            Mode::Vacuum
        }
        other => return at(*mode_line, format!("unknown mode '{other}' (expected phenomenological, box or vacuum)")),
    };

    let section = |name: &str| sections.iter().find(|s| s.name == name);
    let damping = match section("model").and_then(|s| s.entries.get("damping")) {
        Some((line, text)) => text.parse::<DampingForm>().or_else(|e| at(*line, e.to_string()))?,
        None => DampingForm::default(),
    };

    let mut grid = GridSpec { omega_min: 0.0, omega_max: 10.0, n_points: 2001, spacing: Spacing::Linear };
    if let Some(s) = section("grid") {
        if let Some((line, text)) = s.entries.get("spacing") {
            grid.spacing = match text.to_ascii_lowercase().as_str() {
                "linear" => Spacing::Linear,
                "log" => Spacing::Log,
                "refined" => Spacing::Refined,
                other => return at(*line, format!("unknown spacing '{other}' (expected linear, log or refined)")),
            };
        }
        if let Some((_, v)) = number(&s.entries, "omega_min")? {
            grid.omega_min = v.float;
        }
        if let Some((_, v)) = number(&s.entries, "omega_max")? {
            grid.omega_max = v.float;
        }
        if let Some((line, v)) = number(&s.entries, "n_points")? {
            grid.n_points = integer(line, "n_points", v, MIN_GRID_POINTS as i64)? as usize;
        }
        let line = s.entries.get("omega_max").or(s.entries.get("omega_min")).map(|e| e.0).unwrap_or(s.line);
        if grid.omega_min < 0.0 || grid.omega_max <= grid.omega_min {
            return at(line, format!("need 0 ≤ omega_min < omega_max (got {} and {})", grid.omega_min, grid.omega_max));
        }
        if grid.spacing == Spacing::Log && grid.omega_min <= 0.0 {
            return at(line, "log spacing needs omega_min > 0");
        }
    }

    let mut polariton = PolaritonSpec { k: vec![10.0], gamma_scale: 1e-2 };
    if let Some(s) = section("polariton") {
        if let Some((line, text)) = s.entries.get("k") {
            let mut ks = Vec::new();
            for part in text.split(',') {
                match parse_value(part.trim()) {
                    Ok(v) if v.float > 0.0 => ks.push(v.float),
                    Ok(v) => return at(*line, format!("wavevectors must be positive (got {})", v.float)),
                    Err(e) => return at(*line, format!("'k': {e}")),
                }
            }
            if ks.windows(2).any(|p| p[1] <= p[0]) {
                return at(*line, "wavevectors must be strictly increasing");
            }
            polariton.k = ks;
        }
        if let Some((line, v)) = number(&s.entries, "gamma_scale")? {
            if !(v.float > 0.0 && v.float <= 1.0) {
                return at(line, format!("'gamma_scale' must lie in (0, 1] (got {})", v.float));
            }
            polariton.gamma_scale = v.float;
        }
    }

    let out_dir = section("output")
        .and_then(|s| s.entries.get("dir"))
        .map(|(_, d)| PathBuf::from(d))
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(ScenarioConfig { mode, damping, grid, polariton, out_dir })
}

#[cfg(test)]
mod tests {
    use super::*;

    const STRONG_MEDIUM: &str = "mode = phenomenological
[transition]
omega = 1
gamma = 0.18
edip = 2
dipoct = 65/64
[transition]
omega = 2
gamma = 0.05
mdip = 1/16
[transition]
omega = 3
gamma = 0.04
quad = 1/64
dia = 9
";

    #[test]
    fn reads_transition_table() {
        let c = parse(STRONG_MEDIUM).unwrap();
        let Mode::Phenomenological(rows) = &c.mode else { panic!() };
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].dipoct.exact, Some(Rational::new(65, 64)));
        assert_eq!(rows[1].line, 7);
        let exact: Vec<_> = rows.iter().map(|r| r.exact_sum_rule_terms().unwrap()).collect();
        assert_eq!(diamag::causality::mu_sum_rule_residual_exact(&exact), Rational::from_integer(0));
        assert_eq!(c.damping, DampingForm::Balanced);
        assert_eq!(c.grid.n_points, 2001);
    }

    #[test]
    fn reads_box_section() {
        let c = parse(
            "mode = box\n[box]\nlx = 0.2/(2*pi)\nly = 0.4/(2*pi)\nlz = 0.2/(2*pi)\nmass = 500\ncharge = 1/sqrt(32)\ndensity = 16000\ngamma = 0.15\nn_max = 6\n",
        )
        .unwrap();
        let Mode::Box(b) = c.mode else { panic!() };
        assert!((b.plasma_frequency() - 1.0).abs() < 1e-12);
        assert_eq!(b.n_max, 6);
    }

    fn error_of(text: &str) -> ConfigError {
        parse(text).unwrap_err()
    }

    #[test]
    fn diagnostics_point_at_lines() {
        assert_eq!(error_of("mode = phenomenological\n").line, Some(1));
        assert!(error_of("mode = phenomenological\n").message.contains("at least one [transition]"));
        assert_eq!(error_of("mode = vacuum\n[grid]\nomega_max = abc\n").line, Some(3));
        assert_eq!(error_of("mode = vacuum\n\n[grid]\nspan = 3\n").line, Some(4));
        assert_eq!(error_of("mode = vacuum\n[trans]\n").line, Some(2));
        assert_eq!(error_of("mode = vacuum\n[grid]\nn_points = 8\n").line, Some(3));
        assert_eq!(error_of("mode = vacuum\n[grid]\nn_points = 20\nn_points = 30\n").line, Some(4));
        assert_eq!(error_of("mode = box\n[box]\nlx = 1\n").line, Some(2));
        assert_eq!(error_of("mode = phenomenological\n[transition]\nomega = 1\ngamma = 0\n").line, Some(4));
        assert_eq!(error_of("mode = vacuum\noops\n").line, Some(2));
        assert_eq!(error_of("mode = magic\n").line, Some(1));
        assert_eq!(error_of("[grid]\n").line, None);
    }

    #[test]
    fn modes_are_exclusive() {
        let mixed = format!("{STRONG_MEDIUM}[box]\nlx = 1\n");
        assert!(error_of(&mixed).message.contains("not used in phenomenological mode"));
        assert!(error_of("mode = vacuum\n[transition]\nomega = 1\ngamma = 1\n").message.contains("vacuum"));
    }

    #[test]
    fn grid_and_polariton_sections() {
        let c = parse("mode = vacuum\n[grid]\nomega_min = 1e-3\nomega_max = 1e3\nn_points = 64\nspacing = log\n[polariton]\nk = 1, 10, 100\ngamma_scale = 1/1000\n").unwrap();
        let pts = c.grid.points(&[]);
        assert_eq!(pts.len(), 64);
        assert!((pts[0] - 1e-3).abs() < 1e-15 && (pts[63] - 1e3).abs() < 1e-9);
        assert_eq!(c.polariton.k, vec![1.0, 10.0, 100.0]);
        assert_eq!(c.polariton.gamma_scale, 1e-3);
        assert!(parse("mode = vacuum\n[polariton]\nk = 10, 1\n").is_err());
        assert!(parse("mode = vacuum\n[grid]\nomega_min = 0\nspacing = log\n").is_err());
    }

    #[test]
    fn refined_grid_respects_bounds() {
        let g = GridSpec { omega_min: 0.5, omega_max: 5.0, n_points: 200, spacing: Spacing::Refined };
        let pts = g.points(&[(1.0, 0.1)]);
        assert!(pts.len() >= 200);
        assert!(pts.iter().all(|&w| (0.5..=5.0).contains(&w)));
    }
}
