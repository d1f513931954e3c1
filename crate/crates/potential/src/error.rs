use coulomb_kernel::KernelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("invalid potential spec: {0}")]
    InvalidSpec(String),
    #[error("point {point:?} is outside the potential's declared domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("{kind} potentials are not supported in d = {dim}")]
    UnsupportedDim { kind: &'static str, dim: usize },
    #[error("invalid temperature schedule: {0}")]
    InvalidSchedule(String),
    #[error("potential file: {0}")]
    Io(#[from] std::io::Error),
    #[error("potential JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T, E = PotentialError> = std::result::Result<T, E>;
