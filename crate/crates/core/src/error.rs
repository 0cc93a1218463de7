use thiserror::Error;

/// Errors raised by the geometry, function-space, quadrature and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid too large: {0} samples exceeds the limit of 2^26")]
    GridOverflow(usize),
    #[error("grid under-resolved: {0}")]
    UnderResolved(String),
    #[error("quadrature cutoff too small: tail ratio {0:.3e}")]
    CutoffTooSmall(f64),
    #[error("infeasible slot count {0}: need an even count of at most 8")]
    InfeasibleSlots(usize),
    #[error("cone inclusion violated at sample {index}: {detail}")]
    ConeViolation { index: usize, detail: String },
    #[error("support check failed: {0}")]
    Support(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
