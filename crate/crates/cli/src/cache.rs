//! Moment cache for box mode: one row per enumerated transition, headed by a
//! hash of everything the rows depend on.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use diamag::multipole::TransitionStrengths;
use diamag::quantum_box::BoxState;
use diamag::response::BoxMedium;

use crate::CliError;

const FORMAT: &str = "diamag-moment-cache-1";
pub const HEADER: &str = "nx ny nz omega_eg d_edip d_quad d_mdip d_dia d_dipoct";

pub fn geometry_hash(medium: &BoxMedium) -> String {
    let g = &medium.geometry;
    let mut h = Sha256::new();
    h.update(FORMAT.as_bytes());
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    for x in [g.lengths[0], g.lengths[1], g.lengths[2], g.mass, g.charge, medium.density, medium.gamma_e] {
        h.update(x.to_bits().to_le_bytes());
    }
    h.update(medium.n_max.to_le_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CachedRow {
    pub state: BoxState,
    pub strengths: TransitionStrengths,
}

pub fn render(medium: &BoxMedium, rows: &[CachedRow]) -> String {
    let mut s = format!("# {FORMAT} hash={}\n# units: omega_p\n{HEADER}\n", geometry_hash(medium));
    for r in rows {
        let t = &r.strengths;
        let [nx, ny, nz] = r.state.n;
        writeln!(
            s,
            "{nx} {ny} {nz} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            t.omega_eg, t.d_edip, t.d_quad, t.d_mdip, t.d_dia, t.d_dipoct
        )
        .unwrap();
    }
    s
}

pub enum Lookup {
    Hit(Vec<CachedRow>),
    Missing,
    Stale(String),
}

/// Reads the cache if its hash matches `medium`.
pub fn load(path: &Path, medium: &BoxMedium) -> Result<Lookup, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Lookup::Missing),
        Err(source) => return Err(CliError::Io { path: path.to_path_buf(), source }),
    };
    let want = format!("# {FORMAT} hash={}", geometry_hash(medium));
    let mut lines = text.lines();
    if lines.next() != Some(want.as_str()) {
        return Ok(Lookup::Stale("geometry hash differs".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.starts_with('#') || line == HEADER {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let parsed = (|| -> Option<CachedRow> {
            if f.len() != 9 {
                return None;
            }
            let n: Vec<u32> = f[..3].iter().map(|x| x.parse().ok()).collect::<Option<_>>()?;
            let v: Vec<f64> = f[3..].iter().map(|x| x.parse().ok()).collect::<Option<_>>()?;
            Some(CachedRow {
                state: BoxState::new(n[0], n[1], n[2]).ok()?,
                strengths: TransitionStrengths {
                    omega_eg: v[0],
                    gamma_e: medium.gamma_e,
                    d_edip: v[1],
                    d_quad: v[2],
                    d_mdip: v[3],
                    d_dia: v[4],
                    d_dipoct: v[5],
                },
            })
        })();
        match parsed {
            Some(r) => rows.push(r),
            None => return Ok(Lookup::Stale(format!("unreadable row on line {}", i + 2))),
        }
    }
    Ok(Lookup::Hit(rows))
}
