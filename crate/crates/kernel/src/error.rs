use thiserror::Error;

/// Errors raised by kernel-level evaluations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel evaluated at coincident points")]
    Singular,
    #[error("dimension {0} is not supported (only d = 2, 3)")]
    UnsupportedDim(usize),
    #[error("point {point:?} lies outside the domain: {reason}")]
    OutOfDomain { point: Vec<f64>, reason: String },
    #[error("expected a {expected}-dimensional input, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = KernelError> = std::result::Result<T, E>;
