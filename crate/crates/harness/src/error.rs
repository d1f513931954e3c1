use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("missing artifact {}: {reason}", path.display())]
    MissingArtifact { path: PathBuf, reason: String },
    #[error("sample file {} holds no samples", .0.display())]
    EmptySamples(PathBuf),
    #[error("run directory {} already exists", .0.display())]
    RunExists(PathBuf),
    #[error("contract {name} failed: {detail}")]
    VerifyFailed { name: String, detail: String },
    #[error(transparent)]
    Potential(#[from] coulomb_potential::PotentialError),
    #[error(transparent)]
    Equilibrium(#[from] coulomb_equilibrium::EquilibriumError),
    #[error(transparent)]
    Sampler(#[from] coulomb_sampler::SamplerError),
    #[error(transparent)]
    Estimator(#[from] coulomb_estimators::EstimatorError),
    #[error(transparent)]
    Oracle(#[from] coulomb_oracle::OracleError),
    #[error(transparent)]
    Kernel(#[from] coulomb_kernel::KernelError),
    #[error("io error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Process exit codes of the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const MISSING_ARTIFACT: i32 = 3;
    pub const EMPTY_SAMPLES: i32 = 4;
    pub const RUN_EXISTS: i32 = 5;
    pub const NUMERICAL: i32 = 6;
    pub const IO: i32 = 7;
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use coulomb_equilibrium::EquilibriumError;
        use coulomb_estimators::EstimatorError;
        use coulomb_kernel::KernelError;
        use coulomb_potential::PotentialError;
        use coulomb_sampler::SamplerError;
        match self {
            HarnessError::VerifyFailed { .. } => exit::VERIFY_FAILED,
            HarnessError::Config(_) | HarnessError::Json(_) => exit::CONFIG,
            HarnessError::Potential(PotentialError::Json(_) | PotentialError::InvalidSpec(_))
            | HarnessError::Potential(PotentialError::InvalidSchedule(_))
            | HarnessError::Potential(PotentialError::UnsupportedDim { .. }) => exit::CONFIG,
            HarnessError::Estimator(EstimatorError::DimensionMismatch { .. })
            | HarnessError::Kernel(KernelError::DimensionMismatch { .. }) => exit::CONFIG,
            HarnessError::Potential(PotentialError::Io(_))
            | HarnessError::Sampler(SamplerError::Io(_) | SamplerError::Format(_))
            | HarnessError::Equilibrium(EquilibriumError::Io(_) | EquilibriumError::Artifact(_)) => exit::IO,
            HarnessError::MissingArtifact { .. } => exit::MISSING_ARTIFACT,
            HarnessError::EmptySamples(_) | HarnessError::Estimator(EstimatorError::EmptySamples) => {
                exit::EMPTY_SAMPLES
            }
            HarnessError::RunExists(_) => exit::RUN_EXISTS,
            HarnessError::Io { .. } => exit::IO,
            _ => exit::NUMERICAL,
        }
    }
}
