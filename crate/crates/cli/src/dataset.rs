//! Plain-text datasets: the frequency sweep and the polariton branch table.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use diamag::causality::TabulatedResponse;
use diamag::polariton::{optical_sum_rule_residual, BranchSolution};
use diamag::response::{MediumModel, ResponseSample};
use diamag::Complex64;

use crate::CliError;

pub const UNITS_LINE: &str = "# units: omega_p";
pub const RESPONSE_HEADER: &str = "omega,re_eps,im_eps,re_mu,im_mu,re_epsmu,im_epsmu";
pub const BRANCH_HEADER: &str = "branch,k,omega,v_p,v_g,re_omega_damped,im_omega_damped,sum_rule_residual,complete";

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn response_table(samples: &[ResponseSample]) -> String {
    let mut s = format!("{UNITS_LINE}\n{RESPONSE_HEADER}\n");
    for r in samples {
        let cols = [r.omega, r.eps.re, r.eps.im, r.mu.re, r.mu.im, r.epsmu.re, r.epsmu.im];
        let line: Vec<String> = cols.iter().map(|&x| num(x)).collect();
        writeln!(s, "{}", line.join(",")).unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRow {
    pub omega: f64,
    pub eps: Complex64,
    pub mu: Complex64,
    pub epsmu: Complex64,
}

pub fn read_response_table(text: &str) -> Result<Vec<ResponseRow>, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == RESPONSE_HEADER => {}
        Some((i, h)) => return Err(format!("line {}: expected header '{RESPONSE_HEADER}', found '{h}'", i + 1)),
        None => return Err("empty dataset".into()),
    }
    lines
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", i + 1))?;
            if v.len() != 7 {
                return Err(format!("line {}: expected 7 columns, found {}", i + 1, v.len()));
            }
            Ok(ResponseRow {
                omega: v[0],
                eps: Complex64::new(v[1], v[2]),
                mu: Complex64::new(v[3], v[4]),
                epsmu: Complex64::new(v[5], v[6]),
            })
        })
        .collect()
}

/// `χ = 1 - 1/μ` from a dataset, with the tail fitted to the last samples.
pub fn chi_from_rows(rows: &[ResponseRow]) -> diamag::Result<TabulatedResponse> {
    TabulatedResponse::with_fitted_tail(
        rows.iter().map(|r| r.omega).collect(),
        rows.iter().map(|r| 1.0 - 1.0 / r.mu).collect(),
    )
}

pub fn branch_table(solution: &BranchSolution, model: &MediumModel) -> String {
    let mut s = format!("{UNITS_LINE}\n{BRANCH_HEADER}\n");
    let residuals: Vec<(f64, Option<(f64, bool)>)> = solution
        .counts
        .iter()
        .map(|&(k, _, _)| (k, optical_sum_rule_residual(solution, model, k).ok().map(|r| (r.residual, r.reliable))))
        .collect();
    for (j, b) in solution.branches.iter().enumerate() {
        for i in 0..b.k_grid.len() {
            let k = b.k_grid[i];
            let (res, complete) = residuals.iter().find(|r| r.0 == k).and_then(|r| r.1).unwrap_or((f64::NAN, false));
            let wd = b.omega_damped[i].unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            writeln!(
                s,
                "{j},{},{},{},{},{},{},{},{}",
                num(k),
                num(b.omega[i]),
                num(b.v_p[i]),
                num(b.v_g[i]),
                num(wd.re),
                num(wd.im),
                num(res),
                complete
            )
            .unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use diamag::presets::strongly_diamagnetic;

    #[test]
    fn response_table_round_trips() {
        let m = strongly_diamagnetic();
        let samples: Vec<_> = (0..20).map(|i| m.sample(i as f64 * 0.37).unwrap()).collect();
        let text = response_table(&samples);
        assert!(text.starts_with("# units: omega_p\nomega,re_eps"));
        let rows = read_response_table(&text).unwrap();
        assert_eq!(rows.len(), 20);
        for (r, s) in rows.iter().zip(samples.iter()) {
            assert_eq!(r.omega, s.omega);
            assert_eq!(r.mu, s.mu);
            assert_eq!(r.epsmu, s.epsmu);
        }
    }

    #[test]
    fn malformed_tables_are_reported_by_line() {
        assert!(read_response_table("# units: omega_p\nomega,x\n").unwrap_err().starts_with("line 2"));
        let bad = format!("{UNITS_LINE}\n{RESPONSE_HEADER}\n1,2,3\n");
        assert!(read_response_table(&bad).unwrap_err().starts_with("line 3"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
