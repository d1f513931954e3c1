//! Metropolis sampling of the Coulomb gas Gibbs measure ∝ e^{−βH}, with
//! exact samplers for tiny N and for the Ginibre ensemble.

mod chain;
mod error;
mod exact;
mod params;
pub mod rng;
mod sample_set;
mod stats;

pub use chain::{
    acceptance_probability, init_configuration, mh_step, proposal_density, run_chain, run_chains, sample_measure,
    sweep, ChainState, ChainStats, ENERGY_TRACE_CAPACITY, INITIAL_STEP_SCALE, RECHECK_SWEEPS, TARGET_ACCEPTANCE,
};
pub use error::{Result, SamplerError};
pub use exact::{exact_ginibre, rejection_sample_small_n, uniform_ball_samples, MAX_EXACT_N};
pub use params::GasParams;
pub use sample_set::{
    ChainSchedule, ChainSummary, SampleHeader, SampleSet, SampleSource, SAMPLE_FORMAT_VERSION, SAMPLE_MAGIC,
};
pub use stats::integrated_autocorrelation;
