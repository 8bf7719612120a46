//! Frequency-dependent response of a medium built from transition strengths:
//! permittivity, permeability, magnetic susceptibility and the transverse
//! current response.
//!
//! With `D_e = ω_eg² - ω² - 2iωγ_e`,
//!
//! ```text
//! ε(ω)   = 1 + Σ_e Δ_edip / D_e
//! 1/μ(ω) = 1 + Σ_e [Δ_dia/ω_eg² - Δ_mdip/D_e - Δ_quad N_e/D_e + Δ_dipoct N_e/D_e]
//! χ(ω)   = 1 - 1/μ(ω)
//! ```
//!
//! where the numerator `N_e` of the quadrupole and dipole-octupole terms depends
//! on the [`DampingForm`].

use std::fmt;

use num_complex::Complex64;

use crate::multipole::{scalar_average, ChannelTensors, TransitionStrengths};
use crate::quantum_box::{enumerate_transitions, BoxGeometry, BoxState, MomentSet};
use crate::tensor::Tensor4;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How linewidths enter the resonant denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DampingForm {
    /// `D = ω_eg² - ω² - 2iωγ`, `N = ω²`.
    Printed,
    /// `D = ω_eg² - (ω + iγ)²`, `N = ω²`.
    Shifted,
    /// `D = ω_eg² - ω² - 2iωγ`, `N = ω² + 2iωγ = ω_eg² - D`.
    ///
    /// Every multipole term is then a plain Lorentzian plus a constant, the
    /// constants cancel for a sum-rule-closed model, and `χ` decays as `1/ω²`.
    /// `Printed` leaves a `2iγ/ω` tail in `χ` that drives `Im(εμ)` negative just
    /// above the dipole-octupole resonance.
    #[default]
    Balanced,
}

impl fmt::Display for DampingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DampingForm::Printed => "printed",
            DampingForm::Shifted => "shifted",
            DampingForm::Balanced => "balanced",
        })
    }
}

impl std::str::FromStr for DampingForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "printed" => Ok(Self::Printed),
            "shifted" => Ok(Self::Shifted),
            "balanced" => Ok(Self::Balanced),
            other => Err(Error::InvalidParameter(format!("unknown damping form `{other}`"))),
        }
    }
}

/// Emitter model behind a [`MediumModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Phenomenological { label: String },
    Box { geometry: BoxGeometry, density: f64, n_max: u32 },
    Vacuum,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Phenomenological { label } => write!(f, "phenomenological ({label})"),
            Provenance::Box { geometry, density, n_max } => write!(
                f,
                "particle in a box L = {:?}, m = {}, q = {}, rho0 = {}, n_max = {}",
                geometry.lengths, geometry.mass, geometry.charge, density, n_max
            ),
            Provenance::Vacuum => f.write_str("vacuum"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub transitions: Vec<TransitionStrengths>,
    /// `√(ρ₀q²/m)` in the units the model was specified in; all stored
    /// frequencies and strengths are already divided by it.
    pub omega_p: f64,
    pub provenance: Provenance,
    pub damping: DampingForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSample {
    pub omega: f64,
    pub eps: Complex64,
    pub mu: Complex64,
    pub chi: Complex64,
    pub chi_e: Complex64,
    pub epsmu: Complex64,
}

/// Monochromatic transverse probe `A e^{i(k·x - ωt)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveProbe {
    pub omega: f64,
    pub k: f64,
    /// unit propagation direction
    pub k_hat: [f64; 3],
    pub a: [Complex64; 3],
}

impl PlaneWaveProbe {
    /// Probe along `z` polarised along `x`.
    pub fn along_z(omega: f64, k: f64, amplitude: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { omega, k, k_hat: [0.0, 0.0, 1.0], a: [amplitude, zero, zero] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticLimits {
    pub mu0: f64,
    pub eps0: f64,
    pub chi0: f64,
}

impl MediumModel {
    /// A lossy medium; every transition needs `γ_e > 0`.
    pub fn new(transitions: Vec<TransitionStrengths>, omega_p: f64, provenance: Provenance) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (i, t) in transitions.iter().enumerate() {
            t.validate(i)?;
            if t.gamma_e <= 0.0 {
                return Err(Error::InvalidTransition { index: i, reason: "gamma_e must be positive".into() });
            }
        }
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_p must be positive (got {omega_p})")));
        }
        Ok(Self { transitions, omega_p, provenance, damping: DampingForm::default() })
    }

    /// Empty medium, `ε = μ = 1`.
    pub fn vacuum() -> Self {
        Self { transitions: Vec::new(), omega_p: 1.0, provenance: Provenance::Vacuum, damping: DampingForm::default() }
    }

    pub fn with_damping(mut self, damping: DampingForm) -> Self {
        self.damping = damping;
        self
    }

    /// Multiplies every linewidth by `scale`.
    pub fn with_gamma_scale(mut self, scale: f64) -> Self {
        for t in &mut self.transitions {
            t.gamma_e *= scale;
        }
        self
    }

    pub fn is_vacuum(&self) -> bool {
        self.transitions.is_empty()
    }

    fn denominator(&self, t: &TransitionStrengths, w: Complex64) -> Complex64 {
        let w0 = t.omega_eg;
        match self.damping {
            DampingForm::Printed | DampingForm::Balanced => w0 * w0 - w * w - 2.0 * I * w * t.gamma_e,
            DampingForm::Shifted => {
                let s = w + I * t.gamma_e;
                w0 * w0 - s * s
            }
        }
    }

    fn numerator(&self, t: &TransitionStrengths, w: Complex64) -> Complex64 {
        match self.damping {
            DampingForm::Balanced => w * w + 2.0 * I * w * t.gamma_e,
            DampingForm::Printed | DampingForm::Shifted => w * w,
        }
    }

    /// `χ_E = ε - 1` at a complex frequency.
    pub fn chi_e_at(&self, w: Complex64) -> Complex64 {
        self.transitions.iter().map(|t| t.d_edip / self.denominator(t, w)).sum()
    }

    /// `χ` at a complex frequency.
    pub fn chi_at(&self, w: Complex64) -> Complex64 {
        self.transitions
            .iter()
            .map(|t| {
                let d = self.denominator(t, w);
                let n = self.numerator(t, w);
                -t.d_dia / (t.omega_eg * t.omega_eg) + t.d_mdip / d + (t.d_quad - t.d_dipoct) * n / d
            })
            .sum()
    }

    pub fn epsilon(&self, omega: f64) -> Complex64 {
        1.0 + self.chi_e_at(omega.into())
    }

    pub fn chi_e(&self, omega: f64) -> Complex64 {
        self.chi_e_at(omega.into())
    }

    pub fn inverse_mu(&self, omega: f64) -> Complex64 {
        let w: Complex64 = omega.into();
        let s: Complex64 = self
            .transitions
            .iter()
            .map(|t| {
                let d = self.denominator(t, w);
                let n = self.numerator(t, w);
                t.d_dia / (t.omega_eg * t.omega_eg) - t.d_mdip / d - t.d_quad * n / d + t.d_dipoct * n / d
            })
            .sum();
        1.0 + s
    }

    pub fn mu(&self, omega: f64) -> Result<Complex64> {
        let inv = self.inverse_mu(omega);
        if inv.norm() == 0.0 || !inv.is_finite() {
            return Err(Error::Pole { omega });
        }
        Ok(1.0 / inv)
    }

    pub fn chi(&self, omega: f64) -> Complex64 {
        self.chi_at(omega.into())
    }

    /// `χ^H = χ/(1 - χ) = μ - 1`.
    pub fn chi_h(&self, omega: f64) -> Result<Complex64> {
        let chi = self.chi(omega);
        let den = 1.0 - chi;
        if den.norm() == 0.0 {
            return Err(Error::Pole { omega });
        }
        Ok(chi / den)
    }

    pub fn sample(&self, omega: f64) -> Result<ResponseSample> {
        let eps = self.epsilon(omega);
        let mu = self.mu(omega)?;
        Ok(ResponseSample { omega, eps, mu, chi: self.chi(omega), chi_e: eps - 1.0, epsmu: eps * mu })
    }

    /// Induced current `δj = [ω²χ_E(ω) + k²χ(ω)] A` for a transverse probe.
    pub fn current_response(&self, probe: &PlaneWaveProbe) -> Result<[Complex64; 3]> {
        if probe.k < 0.0 {
            return Err(Error::NegativeWavevector(probe.k));
        }
        let a_norm = probe.a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let k_norm = probe.k_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
        let along: Complex64 = probe.a.iter().zip(probe.k_hat.iter()).map(|(a, k)| a * k).sum();
        if a_norm > 0.0 && along.norm() > 1e-12 * a_norm * k_norm {
            return Err(Error::NotTransverse(along.norm() / (a_norm * k_norm)));
        }
        let w: Complex64 = probe.omega.into();
        let bracket: Complex64 = self
            .transitions
            .iter()
            .map(|t| {
                let d = self.denominator(t, w);
                let n = self.numerator(t, w);
                t.d_edip * w * w / d
                    - probe.k
                        * probe.k
                        * (t.d_dia / (t.omega_eg * t.omega_eg) - t.d_mdip / d - t.d_quad * n / d + t.d_dipoct * n / d)
            })
            .sum();
        Ok(probe.a.map(|a| bracket * a))
    }

    pub fn static_limits(&self) -> Result<StaticLimits> {
        let mut para = 0.0;
        let mut eps = 1.0;
        for t in &self.transitions {
            let w2 = t.omega_eg * t.omega_eg;
            para += (t.d_dia - t.d_mdip) / w2;
            eps += t.d_edip / w2;
        }
        let den = 1.0 + para;
        if den == 0.0 {
            return Err(Error::StaticPole);
        }
        // the dispersive forms must agree and be real at ω = 0
        let inv = self.inverse_mu(0.0);
        let e0 = self.epsilon(0.0);
        debug_assert!(inv.im.abs() < 1e-14 && e0.im.abs() < 1e-14);
        Ok(StaticLimits { mu0: 1.0 / den, eps0: eps, chi0: -para })
    }

    /// On-resonance estimate `[Δ_edip - Δ_dipoct ω_eg²]/(2ω_eg γ_e)` of `Im(ε/μ*)`.
    pub fn resonant_positivity(&self, index: usize) -> Result<f64> {
        let t = self.transitions.get(index).ok_or_else(|| {
            Error::InvalidParameter(format!("transition index {index} out of range ({})", self.transitions.len()))
        })?;
        if t.gamma_e <= 0.0 {
            return Err(Error::InvalidTransition { index, reason: "gamma_e must be positive".into() });
        }
        Ok((t.d_edip - t.d_dipoct * t.omega_eg * t.omega_eg) / (2.0 * t.omega_eg * t.gamma_e))
    }

    /// `Σ_e [Δ_dia/ω_eg² + Δ_quad - Δ_dipoct]`; zero exactly when `μ(∞) = 1`.
    pub fn sum_rule_residual(&self) -> f64 {
        self.transitions.iter().map(|t| t.d_dia / (t.omega_eg * t.omega_eg) + t.d_quad - t.d_dipoct).sum()
    }

    /// `lim_{ω→∞} χ(ω) = -Σ_e [Δ_dia/ω_eg² + Δ_quad - Δ_dipoct]`.
    pub fn chi_infinity(&self) -> f64 {
        -self.sum_rule_residual()
    }

    /// Partial fractions of `χ` and `χ_E`.
    pub fn pole_expansion(&self) -> Result<PoleExpansions> {
        let mut chi = PoleExpansion { constant: 0.0.into(), poles: Vec::new() };
        let mut chi_e = PoleExpansion { constant: 0.0.into(), poles: Vec::new() };
        for (index, t) in self.transitions.iter().enumerate() {
            let (p1, p2) = self.denominator_roots(t);
            if (p1 - p2).norm() <= 1e-12 * t.omega_eg {
                return Err(Error::InvalidTransition { index, reason: "critically damped".into() });
            }
            let dq = t.d_quad - t.d_dipoct;
            // numerator a + bω + cω² over D = -(ω - p1)(ω - p2)
            let (a, b, c): (Complex64, Complex64, Complex64) = match self.damping {
                DampingForm::Balanced => (t.d_mdip.into(), 2.0 * I * t.gamma_e * dq, dq.into()),
                _ => (t.d_mdip.into(), 0.0.into(), dq.into()),
            };
            chi.constant += -t.d_dia / (t.omega_eg * t.omega_eg) - c;
            chi.push_quadratic(a, b, c, p1, p2);
            chi_e.push_quadratic(t.d_edip.into(), 0.0.into(), 0.0.into(), p1, p2);
        }
        Ok(PoleExpansions { chi, chi_e })
    }

    fn denominator_roots(&self, t: &TransitionStrengths) -> (Complex64, Complex64) {
        let g = t.gamma_e;
        let w0 = t.omega_eg;
        match self.damping {
            DampingForm::Printed | DampingForm::Balanced => {
                let s = Complex64::new(w0 * w0 - g * g, 0.0).sqrt();
                (-I * g + s, -I * g - s)
            }
            DampingForm::Shifted => (w0 - I * g, -w0 - I * g),
        }
    }
}

/// `f(ω) = constant + Σ residue/(ω - pole)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleExpansion {
    pub constant: Complex64,
    /// `(pole, residue)`; every pole lies in the lower half plane.
    pub poles: Vec<(Complex64, Complex64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleExpansions {
    pub chi: PoleExpansion,
    pub chi_e: PoleExpansion,
}

impl PoleExpansion {
    /// Adds `(c ω² + b ω + a)/D` minus its constant part `-c`, with `D = -(ω-p1)(ω-p2)`.
    fn push_quadratic(&mut self, a: Complex64, b: Complex64, c: Complex64, p1: Complex64, p2: Complex64) {
        let s = p1 + p2;
        let prod = p1 * p2;
        let lin = b + c * s;
        let cst = a - c * prod;
        let r1 = -(lin * p1 + cst) / (p1 - p2);
        let r2 = -(lin * p2 + cst) / (p2 - p1);
        self.poles.push((p1, r1));
        self.poles.push((p2, r2));
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.constant + self.poles.iter().map(|(p, r)| r / (w - p)).sum::<Complex64>()
    }

    /// Inverse transform `(1/2π)∫ f(ω) e^{-iωt} dω` without the constant's delta
    /// function: `-i Σ r e^{-ipt}` for `t > 0`, zero for `t < 0`.
    pub fn time_domain(&self, t: f64) -> Complex64 {
        if t < 0.0 {
            return 0.0.into();
        }
        self.poles.iter().map(|(p, r)| -I * r * (-I * p * t).exp()).sum()
    }

    /// `∫_{w}^{∞} Im f(ω)/ω dω` for real `w > 0`, in closed form.
    pub fn im_over_omega_tail(&self, w: f64) -> f64 {
        // r/((ω-p)ω) = (r/p)[1/(ω-p) - 1/ω]; the log branch never crosses because Im p ≠ 0
        let v: Complex64 = self.poles.iter().map(|(p, r)| -(r / p) * (1.0 - p / w).ln()).sum();
        v.im
    }
}

/// Channel tensors of a list of transitions, kept before rotational averaging.
#[derive(Debug, Clone)]
pub struct SusceptibilityTensors {
    entries: Vec<TensorEntry>,
    damping: DampingForm,
}

#[derive(Debug, Clone)]
struct TensorEntry {
    omega_eg: f64,
    gamma_e: f64,
    quad: Tensor4<Complex64>,
    mdip: Tensor4<Complex64>,
    dia: Tensor4<Complex64>,
    dipoct: Tensor4<Complex64>,
}

/// `ζ`, `υ` and `χ` contractions of the total current susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalCoefficients {
    /// `(1/30)[4α_νδνδ - α_ννδδ - α_νδδν]`
    pub zeta: Complex64,
    /// `(1/30)[4α_ννδδ - α_νδνδ - α_δννδ]`
    pub upsilon: Complex64,
    /// `⟨⟨α⟩⟩`
    pub chi: Complex64,
}

impl SusceptibilityTensors {
    /// Scales each channel tensor exactly as [`crate::multipole::transition_strengths`]
    /// scales its average, so `⟨⟨α_tot(ω)⟩⟩` reproduces [`MediumModel::chi`].
    pub fn from_moments(moments: &[MomentSet], mass: f64, gamma_e: f64, damping: DampingForm) -> Self {
        let entries = moments
            .iter()
            .map(|ms| {
                let w = ms.omega_eg;
                let t = ChannelTensors::new(ms);
                TensorEntry {
                    omega_eg: w,
                    gamma_e,
                    quad: t.quad.scale(-1.0 / (mass * w)),
                    mdip: t.mdip.scale(w / mass),
                    dia: t.dia.scale(-w / mass),
                    dipoct: t.dipoct.scale(-1.0 / (mass * w)),
                }
            })
            .collect();
        Self { entries, damping }
    }

    /// Total rank-4 current susceptibility; transverse probes see only `⟨⟨α_tot⟩⟩`.
    pub fn alpha_tot(&self, omega: f64) -> Tensor4<Complex64> {
        let model = MediumModel {
            transitions: Vec::new(),
            omega_p: 1.0,
            provenance: Provenance::Vacuum,
            damping: self.damping,
        };
        let w: Complex64 = omega.into();
        let mut acc = Tensor4::<Complex64>::zeros();
        for e in &self.entries {
            let t = TransitionStrengths { omega_eg: e.omega_eg, gamma_e: e.gamma_e, ..Default::default() };
            let d = model.denominator(&t, w);
            let n = model.numerator(&t, w);
            acc = acc
                + e.dia.scale(-1.0 / (e.omega_eg * e.omega_eg))
                + e.mdip.scale_complex(1.0 / d)
                + (e.quad - e.dipoct).scale_complex(n / d);
        }
        acc
    }
}

pub fn longitudinal_coefficients(alpha: &Tensor4<Complex64>) -> LongitudinalCoefficients {
    let mut c = [Complex64::new(0.0, 0.0); 4];
    for d in 0..3 {
        for n in 0..3 {
            c[0] += alpha.get(n, d, n, d);
            c[1] += alpha.get(n, n, d, d);
            c[2] += alpha.get(n, d, d, n);
            c[3] += alpha.get(d, n, n, d);
        }
    }
    LongitudinalCoefficients {
        zeta: (c[0] * 4.0 - c[1] - c[2]) / 30.0,
        upsilon: (c[1] * 4.0 - c[0] - c[3]) / 30.0,
        chi: scalar_average(alpha),
    }
}

/// Magnetic part of the current, `-ᾱ_{ikmj} k_k k_m A_j`, from an averaged tensor.
pub fn tensor_current(alpha_avg: &Tensor4<Complex64>, k: [f64; 3], a: [Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (i, o) in out.iter_mut().enumerate() {
        for (kk, kv) in k.iter().enumerate() {
            for (m, mv) in k.iter().enumerate() {
                for (j, aj) in a.iter().enumerate() {
                    *o -= alpha_avg.get(i, kk, m, j) * (kv * mv) * aj;
                }
            }
        }
    }
    out
}

/// Parameters of a particle-in-a-box medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxMedium {
    pub geometry: BoxGeometry,
    /// emitter density `ρ₀`
    pub density: f64,
    /// linewidth shared by all transitions, in units of `ω_p`
    pub gamma_e: f64,
    pub n_max: u32,
}

/// One enumerated excitation with its moments and strengths (strengths in `ω_p` units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxTransition {
    pub state: BoxState,
    pub moments: MomentSet,
    pub strengths: TransitionStrengths,
}

impl BoxMedium {
    pub fn plasma_frequency(&self) -> f64 {
        (self.density * self.geometry.charge * self.geometry.charge / self.geometry.mass).sqrt()
    }

    pub fn transitions(&self) -> Result<Vec<BoxTransition>> {
        let wp = self.plasma_frequency();
        if !(wp > 0.0 && wp.is_finite()) {
            return Err(Error::InvalidParameter(format!("plasma frequency must be positive (got {wp})")));
        }
        enumerate_transitions(self.n_max, &self.geometry)?
            .into_iter()
            .map(|(state, moments)| {
                let mut strengths = crate::multipole::transition_strengths(&moments, &self.geometry, self.gamma_e)?;
                // quad and dip-oct carry length², the others are already ratios to ω_p²
                strengths.omega_eg /= wp;
                strengths.d_quad *= wp * wp;
                strengths.d_dipoct *= wp * wp;
                Ok(BoxTransition { state, moments, strengths })
            })
            .collect()
    }

    pub fn model_from(&self, transitions: &[BoxTransition]) -> Result<MediumModel> {
        MediumModel::new(
            transitions.iter().map(|t| t.strengths).collect(),
            self.plasma_frequency(),
            Provenance::Box { geometry: self.geometry, density: self.density, n_max: self.n_max },
        )
    }

    pub fn model(&self) -> Result<MediumModel> {
        self.model_from(&self.transitions()?)
    }
}
