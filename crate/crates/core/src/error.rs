use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("box edge lengths and mass must be positive (got L = {lengths:?}, m = {mass})")]
    InvalidGeometry { lengths: [f64; 3], mass: f64 },
    #[error("quantum numbers must be at least 1 (got {0:?})")]
    InvalidState([u32; 3]),
    #[error("unknown operator kind `{0}`")]
    UnknownOperator(String),
    #[error("excited state {excited:?} does not lie above {ground:?}")]
    NotAnExcitation { ground: [u32; 3], excited: [u32; 3] },
    #[error("basis cutoff n_max = {0} leaves no excited states (need n_max >= 2)")]
    BasisTooSmall(u32),
    #[error("tensor needs 81 components, got {0}")]
    ShapeMismatch(usize),
    #[error("transition frequency must be positive (got {0})")]
    NonPositiveFrequency(f64),
    #[error("transition {index}: {reason}")]
    InvalidTransition { index: usize, reason: String },
    #[error("medium has no transitions")]
    EmptyModel,
    #[error("transition list is empty")]
    EmptyTransitions,
    #[error("response has a pole at omega = {omega}")]
    Pole { omega: f64 },
    #[error("static denominator vanishes")]
    StaticPole,
    #[error("vector potential is not transverse: |A.k|/|A||k| = {0:e}")]
    NotTransverse(f64),
    #[error("wavevector magnitude must be non-negative (got {0})")]
    NegativeWavevector(f64),
    #[error("frequency grid must be strictly increasing and non-negative")]
    GridNotIncreasing,
    #[error("grid has {got} points, need at least {need}")]
    GridTooShort { got: usize, need: usize },
    #[error("tail exponent {0} is below 1; the response must decay at least as 1/omega")]
    TailTooSlow(f64),
    #[error("response does not decay at high frequency (chi(inf) = {0:e})")]
    NotDecaying(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
