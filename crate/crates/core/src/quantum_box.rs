//! Particle in a three-dimensional box: eigenstates, transition frequencies
//! and the position/momentum matrix elements used by the multipole expansion.
//!
//! Eigenfunctions are `ψ_n(x) = √(2/L) sin(nπ(x + L/2)/L)` on `[-L/2, L/2]`,
//! real and with that fixed sign. Operator products are kept in the written
//! order, so `(p_i r_k)` means `p̂_i r̂_k` and is not symmetrised when `i = k`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    /// Edge lengths `(L_x, L_y, L_z)` in units of `1/ω_p`.
    pub lengths: [f64; 3],
    /// Particle mass in units of `ω_p`.
    pub mass: f64,
    /// Charge, dimensionless in natural units.
    pub charge: f64,
}

impl BoxGeometry {
    pub fn new(lengths: [f64; 3], mass: f64, charge: f64) -> Result<Self> {
        let ok = lengths.iter().all(|l| l.is_finite() && *l > 0.0) && mass.is_finite() && mass > 0.0;
        if !ok {
            return Err(Error::InvalidGeometry { lengths, mass });
        }
        Ok(Self { lengths, mass, charge })
    }

    pub fn cubic(length: f64, mass: f64) -> Result<Self> {
        Self::new([length; 3], mass, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxState {
    pub n: [u32; 3],
}

impl BoxState {
    pub fn new(nx: u32, ny: u32, nz: u32) -> Result<Self> {
        let n = [nx, ny, nz];
        if n.contains(&0) {
            return Err(Error::InvalidState(n));
        }
        Ok(Self { n })
    }

    pub fn ground() -> Self {
        Self { n: [1, 1, 1] }
    }
}

impl fmt::Display for BoxState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n[0], self.n[1], self.n[2])
    }
}

/// Eigenfrequency `(π²/2m) Σ n_a²/L_a²`.
pub fn energy(state: BoxState, geom: &BoxGeometry) -> f64 {
    let s: f64 = state.n.iter().zip(geom.lengths.iter()).map(|(&n, &l)| (n as f64 / l).powi(2)).sum();
    PI * PI / (2.0 * geom.mass) * s
}

/// One-dimensional operators whose matrix elements are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator1d {
    Overlap,
    X,
    X2,
    P,
    /// `p̂ x̂` in that order.
    PX,
    /// `p̂ x̂²` in that order.
    PX2,
}

impl FromStr for Operator1d {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "overlap" | "1" => Ok(Self::Overlap),
            "x" => Ok(Self::X),
            "x2" | "x²" | "xx" => Ok(Self::X2),
            "p" => Ok(Self::P),
            "px" | "p·x" | "p*x" => Ok(Self::PX),
            "px2" | "p·x²" | "pxx" | "p*x2" => Ok(Self::PX2),
            other => Err(Error::UnknownOperator(other.to_string())),
        }
    }
}

impl Operator1d {
    fn from_counts(has_p: bool, n_r: usize) -> Self {
        match (has_p, n_r) {
            (false, 0) => Self::Overlap,
            (false, 1) => Self::X,
            (false, _) => Self::X2,
            (true, 0) => Self::P,
            (true, 1) => Self::PX,
            (true, _) => Self::PX2,
        }
    }
}

/// `⟨n|O|n'⟩` for a box of length `l`, validated.
pub fn moment_1d(kind: Operator1d, n: u32, n2: u32, l: f64) -> Result<Complex64> {
    if n == 0 || n2 == 0 {
        return Err(Error::InvalidState([n, n2, 0]));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidGeometry { lengths: [l; 3], mass: 1.0 });
    }
    Ok(element_1d(kind, n, n2, l))
}

fn j_term(k: i64) -> f64 {
    if k == 0 || k % 2 != 0 {
        0.0
    } else {
        -1.0 / (k as f64 * PI)
    }
}

fn k_term(k: i64) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        let kp = k as f64 * PI;
        -4.0 / kp.powi(3) + 1.0 / (2.0 * kp)
    }
}

fn x_element(n: i64, n2: i64, l: f64) -> f64 {
    if (n + n2) % 2 == 0 {
        return 0.0;
    }
    let (a, b) = (n as f64, n2 as f64);
    -8.0 * a * b * l / (PI * PI * (a * a - b * b).powi(2))
}

pub(crate) fn element_1d(kind: Operator1d, n: u32, n2: u32, l: f64) -> Complex64 {
    let (ni, mi) = (n as i64, n2 as i64);
    let (a, b) = (n as f64, n2 as f64);
    let odd = (ni + mi) % 2 != 0;
    match kind {
        Operator1d::Overlap => {
            if n == n2 {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        }
        Operator1d::X => Complex64::new(x_element(ni, mi, l), 0.0),
        Operator1d::X2 => {
            if n == n2 {
                Complex64::new(l * l * (1.0 / 12.0 - 1.0 / (2.0 * a * a * PI * PI)), 0.0)
            } else if odd {
                ZERO
            } else {
                Complex64::new(8.0 * a * b * l * l / (PI * PI * (a * a - b * b).powi(2)), 0.0)
            }
        }
        Operator1d::P => {
            if !odd {
                ZERO
            } else {
                -I * (4.0 * a * b / (l * (a * a - b * b)))
            }
        }
        Operator1d::PX => {
            if odd {
                return ZERO;
            }
            let diag = if n == n2 { 1.0 } else { 0.0 };
            -I * (diag + b * PI * (j_term(ni + mi) + j_term(ni - mi)))
        }
        Operator1d::PX2 => {
            if !odd {
                return ZERO;
            }
            -I * (2.0 * x_element(ni, mi, l) + b * PI * l * (k_term(ni + mi) + k_term(ni - mi)))
        }
    }
}

/// `⟨bra| p̂_{p_axis} r̂_{r_axes[0]} r̂_{r_axes[1]} … |ket⟩` as a product over axes.
fn element_3d(bra: BoxState, ket: BoxState, geom: &BoxGeometry, p_axis: Option<usize>, r_axes: &[usize]) -> Complex64 {
    let mut val = Complex64::new(1.0, 0.0);
    for axis in 0..3 {
        let n_r = r_axes.iter().filter(|&&a| a == axis).count();
        let kind = Operator1d::from_counts(p_axis == Some(axis), n_r);
        val *= element_1d(kind, bra.n[axis], ket.n[axis], geom.lengths[axis]);
        if val == ZERO {
            break;
        }
    }
    val
}

/// Moments `⟨bra|…|ket⟩` for one ordered pair of states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    /// `p_i`
    pub p: [Complex64; 3],
    /// `(p_i r_k)`
    pub pr: [[Complex64; 3]; 3],
    /// `(p_i r_k r_m)`
    pub prr: [[[Complex64; 3]; 3]; 3],
    /// `r_i`
    pub r: [Complex64; 3],
}

impl Moments {
    pub fn between(bra: BoxState, ket: BoxState, geom: &BoxGeometry) -> Self {
        let mut out = Self::default();
        for i in 0..3 {
            out.p[i] = element_3d(bra, ket, geom, Some(i), &[]);
            out.r[i] = element_3d(bra, ket, geom, None, &[i]);
            for k in 0..3 {
                out.pr[i][k] = element_3d(bra, ket, geom, Some(i), &[k]);
                for m in k..3 {
                    let v = element_3d(bra, ket, geom, Some(i), &[k, m]);
                    out.prr[i][k][m] = v;
                    out.prr[i][m][k] = v;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            m = m.max(self.p[i].norm()).max(self.r[i].norm());
            for k in 0..3 {
                m = m.max(self.pr[i][k].norm());
                for l in 0..3 {
                    m = m.max(self.prr[i][k][l].norm());
                }
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }
}

/// Transition moments for one `g → e` pair, both orderings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    /// `⟨g|…|e⟩`
    pub ge: Moments,
    /// `⟨e|…|g⟩`
    pub eg: Moments,
    pub omega_eg: f64,
}

impl MomentSet {
    /// Largest relative deviation from `r^{eg} = p^{eg}/(i m ω_eg)` over the components.
    pub fn position_momentum_residual(&self, mass: f64) -> f64 {
        let scale = self.eg.r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return self.eg.p.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        (0..3).map(|i| (self.eg.r[i] - self.eg.p[i] / (I * mass * self.omega_eg)).norm() / scale).fold(0.0, f64::max)
    }

    /// Whether any dipole or higher moment is non-zero (position is implied by momentum).
    pub fn has_nonzero_moment(&self) -> bool {
        !(self.ge.is_zero() && self.eg.is_zero())
    }
}

pub fn transition_moments(g: BoxState, e: BoxState, geom: &BoxGeometry) -> Result<MomentSet> {
    let omega_eg = energy(e, geom) - energy(g, geom);
    if g == e || omega_eg <= 0.0 {
        return Err(Error::NotAnExcitation { ground: g.n, excited: e.n });
    }
    Ok(MomentSet { ge: Moments::between(g, e, geom), eg: Moments::between(e, g, geom), omega_eg })
}

/// Ground-state second moments of position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTensors {
    /// `(r_k r_m)^{gg}`
    pub rr: [[f64; 3]; 3],
    /// `⟨r²⟩`, the trace of `rr`
    pub r2: f64,
}

pub fn ground_expectations(g: BoxState, geom: &BoxGeometry) -> GroundTensors {
    let mut rr = [[0.0; 3]; 3];
    for k in 0..3 {
        for m in 0..3 {
            rr[k][m] = element_3d(g, g, geom, None, &[k, m]).re;
        }
    }
    GroundTensors { rr, r2: rr[0][0] + rr[1][1] + rr[2][2] }
}

/// All excitations of the ground state `(1,1,1)` with quantum numbers up to
/// `n_max` that carry at least one non-zero moment, in lexicographic order.
pub fn enumerate_transitions(n_max: u32, geom: &BoxGeometry) -> Result<Vec<(BoxState, MomentSet)>> {
    if n_max < 2 {
        return Err(Error::BasisTooSmall(n_max));
    }
    let g = BoxState::ground();
    let mut out = Vec::new();
    for nx in 1..=n_max {
        for ny in 1..=n_max {
            for nz in 1..=n_max {
                let e = BoxState { n: [nx, ny, nz] };
                if e == g {
                    continue;
                }
                let ms = transition_moments(g, e, geom)?;
                if ms.has_nonzero_moment() {
                    out.push((e, ms));
                }
            }
        }
    }
    Ok(out)
}
