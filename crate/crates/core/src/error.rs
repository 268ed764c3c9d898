use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed structure at cell {index}: {reason}")]
    Structure { index: usize, reason: String },

    #[error("invalid admissible set: {0}")]
    Admissible(String),

    #[error("invalid search rectangle: {0}")]
    Rect(String),

    #[error("degenerate frequency: omega = 0")]
    DegenerateFrequency,

    #[error("Newton did not converge after {iterations} iterations (last iterate {last}, |F| = {residual:e})")]
    Divergence {
        last: Complex64,
        residual: f64,
        iterations: usize,
    },

    #[error("Newton converged to a spurious root {omega} with Im(omega) >= 0")]
    SpuriousRoot { omega: Complex64 },

    #[error("boundary residual too small on search contour near {omega} (|F| = {residual:e}); shift or resample the rectangle")]
    ContourHitsZero { omega: Complex64, residual: f64 },

    #[error("{omega} is not a resonance (|F| = {residual:e})")]
    NotAResonance { omega: Complex64, residual: f64 },

    #[error("x = {x} lies outside [0, {length}]")]
    OutsideDomain { x: f64, length: f64 },

    #[error("argument {z} outside the supported domain of {function}: {reason}")]
    UnsupportedDomain {
        function: &'static str,
        z: Complex64,
        reason: &'static str,
    },

    #[error("{0}")]
    Inapplicable(String),

    #[error("|u({x})| = {modulus:e} is too close to zero")]
    NearZero { x: f64, modulus: f64 },

    #[error("degenerate resonance: |alpha^-1| = {0:e}")]
    DegenerateNormalization(f64),

    #[error("finite-difference oracle failed: {0}")]
    OracleFailure(String),

    #[error("mode tracking lost: {0}")]
    TrackingLoss(String),

    #[error("no resonance with {wanted} minima in the searched window (available counts: {available:?})")]
    SelectorFailure { wanted: usize, available: Vec<usize> },

    #[error("no band gap found below omega = {0}")]
    NoGap(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
