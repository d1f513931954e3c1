use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("sample set is empty")]
    EmptySamples,
    #[error("dimension mismatch: samples are {samples}-dimensional, request is {request}-dimensional")]
    DimensionMismatch { samples: usize, request: usize },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Kernel(#[from] coulomb_kernel::KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = EstimatorError> = std::result::Result<T, E>;
