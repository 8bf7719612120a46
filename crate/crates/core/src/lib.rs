//! Causal electromagnetic response of model insulators.
//!
//! The crate builds permittivity, permeability and magnetic susceptibility
//! from multipole transition strengths, either chosen by hand or computed
//! from a particle-in-a-box emitter, and checks them against the
//! Kramers-Kronig relations, passivity of `εμ` and the Thomas-Reiche-Kuhn
//! sum rules. Frequencies are in units of the plasma frequency `ω_p` with
//! `ε₀ = c = ħ = 1`.

pub mod causality;
pub mod error;
pub mod multipole;
pub mod polariton;
pub mod presets;
pub mod quantum_box;
pub mod response;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
