//! Reference media: the strongly diamagnetic phenomenological set and the
//! atom-like particle-in-a-box medium.

use std::f64::consts::PI;

use num_rational::Ratio;

use crate::causality::RationalStrengths;
use crate::multipole::TransitionStrengths;
use crate::quantum_box::BoxGeometry;
use crate::response::{BoxMedium, MediumModel, Provenance};

/// Three transitions at `ω_eg = 1, 2, 3` with `μ(0) = 64/127`.
pub fn strongly_diamagnetic() -> MediumModel {
    let rows = [
        // ω_eg, γ, edip, mdip, quad, dipoct, dia
        (1.0, 0.18, 2.0, 0.0, 0.0, 65.0 / 64.0, 0.0),
        (2.0, 0.05, 0.0, 1.0 / 16.0, 0.0, 0.0, 0.0),
        (3.0, 0.04, 0.0, 0.0, 1.0 / 64.0, 0.0, 9.0),
    ];
    let transitions = rows
        .iter()
        .map(|&(omega_eg, gamma_e, d_edip, d_mdip, d_quad, d_dipoct, d_dia)| TransitionStrengths {
            omega_eg,
            gamma_e,
            d_edip,
            d_quad,
            d_mdip,
            d_dia,
            d_dipoct,
        })
        .collect();
    MediumModel::new(transitions, 1.0, Provenance::Phenomenological { label: "strongly diamagnetic".into() })
        .expect("reference parameters are valid")
}

/// The same set in exact rational arithmetic.
pub fn strongly_diamagnetic_rational() -> Vec<RationalStrengths> {
    let r = |n: i64, d: i64| Ratio::new(n, d);
    vec![
        RationalStrengths { omega_eg: r(1, 1), d_dia: r(0, 1), d_quad: r(0, 1), d_dipoct: r(65, 64) },
        RationalStrengths { omega_eg: r(2, 1), d_dia: r(0, 1), d_quad: r(0, 1), d_dipoct: r(0, 1) },
        RationalStrengths { omega_eg: r(3, 1), d_dia: r(9, 1), d_quad: r(1, 64), d_dipoct: r(0, 1) },
    ]
}

/// Atom-like box: `L_x = L_z = 0.2/2π`, `L_y = 0.4/2π`, `m = 500`, `ρ₀ = 16000`,
/// `q = 1/√32` (so `ω_p = 1`), `γ_e = 0.15`.
pub fn atom_like_box(n_max: u32) -> BoxMedium {
    let a = 0.2 / (2.0 * PI);
    BoxMedium {
        geometry: BoxGeometry::new([a, 2.0 * a, a], 500.0, 1.0 / 32f64.sqrt()).expect("valid geometry"),
        density: 16000.0,
        gamma_e: 0.15,
        n_max,
    }
}

/// One electric-dipole oscillator, closed under the sum rule.
pub fn single_dipole(omega_eg: f64, d_edip: f64, gamma_e: f64) -> MediumModel {
    MediumModel::new(
        vec![TransitionStrengths { omega_eg, gamma_e, d_edip, ..Default::default() }],
        1.0,
        Provenance::Phenomenological { label: "single dipole".into() },
    )
    .expect("valid oscillator")
}
