use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature grid too coarse: refinement changed values by {change:.3e} (relative)")]
    GridTooCoarse { change: f64 },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),
    #[error(transparent)]
    Kernel(#[from] coulomb_kernel::KernelError),
    #[error(transparent)]
    Potential(#[from] coulomb_potential::PotentialError),
    #[error(transparent)]
    Sampler(#[from] coulomb_sampler::SamplerError),
    #[error(transparent)]
    Estimator(#[from] coulomb_estimators::EstimatorError),
}

pub type Result<T> = std::result::Result<T, OracleError>;
