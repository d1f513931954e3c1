use coulomb_kernel::KernelError;
use coulomb_potential::PotentialError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        /// Damping factors used by the thermal iteration, empty for the obstacle solvers.
        damping: Vec<f64>,
    },
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("artifact: {0}")]
    Artifact(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = EquilibriumError> = std::result::Result<T, E>;
