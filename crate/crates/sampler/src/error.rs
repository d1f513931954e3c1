use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("envelope violated: {0}")]
    EnvelopeFailure(String),
    #[error("cached energy {cached} drifted from recomputed {recomputed}")]
    EnergyDrift { cached: f64, recomputed: f64 },
    #[error("could not place particle {0} inside the potential's domain")]
    Initialization(usize),
    #[error("malformed sample file: {0}")]
    Format(String),
    #[error(transparent)]
    Kernel(#[from] coulomb_kernel::KernelError),
    #[error(transparent)]
    Potential(#[from] coulomb_potential::PotentialError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SamplerError> = std::result::Result<T, E>;
