use thiserror::Error;

pub type Result<T> = std::result::Result<T, KappaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KappaError {
    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("empty composition")]
    EmptyComposition,

    /// Carries the last iterate so callers can inspect how far the solver got.
    #[error(
        "no convergence after {iterations} iterations: p0={p0}, q0={q0}, residual={residual:e}"
    )]
    NoConvergence {
        p0: f64,
        q0: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("unsupported factor kind: {0}")]
    UnsupportedFactorKind(&'static str),

    #[error("off-assignment input: coupled shell residual {residual:e} exceeds {tolerance:e}")]
    OffAssignment { residual: f64, tolerance: f64 },

    #[error("flip energies disagree with re-solved shells: deviation {deviation:e}")]
    FlipMismatch { deviation: f64 },

    #[error("grid range exceeded: preimage {value} outside [{lo}, {hi}]")]
    GridRangeExceeded { value: f64, lo: f64, hi: f64 },

    #[error("non-invertible map: jacobian determinant {det:e} at sample ({i}, {j})")]
    NonInvertibleMap { det: f64, i: usize, j: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("theta not antisymmetric (max |theta + theta^T| = {0:e})")]
    ThetaNotAntisymmetric(f64),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for KappaError {
    fn from(e: std::io::Error) -> Self {
        KappaError::Io(e.to_string())
    }
}

impl From<csv::Error> for KappaError {
    fn from(e: csv::Error) -> Self {
        KappaError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for KappaError {
    fn from(e: serde_json::Error) -> Self {
        KappaError::Parse(e.to_string())
    }
}
