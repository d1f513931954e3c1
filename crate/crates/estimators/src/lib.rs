//! Observables computed from sample sets: counts, ρ₁ and ρ₂ estimates,
//! subharmonicity and confinement diagnostics, extreme radii and Poisson
//! tests. Every estimator is a deterministic function of its inputs.

mod confinement;
mod counts;
mod density;
mod error;
mod extreme;
mod pair;
mod poisson;
mod stats;
mod subharmonic;
mod window;

pub use confinement::{
    confinement_profile, farfield_conditional_check, space_integral, vacuum_tail, Annulus, FarfieldReport,
    ProfileReport, ShellRow, SoftRow, TailReport, VacuumRow, MIN_SHELL_COUNT, SOFT_GAMMAS,
};
pub use counts::{count_in_ball, count_in_window, window_counts, CountStatistics, MgfValue};
pub use density::{estimate_rho1, BinSpec, DensityEstimate, DEFAULT_BIN, LEAKAGE_WARNING};
pub use error::{EstimatorError, Result};
pub use extreme::{extreme_radius, rider_center, ExceedanceRow, ExtremeReport, CURVE_STEP};
pub use pair::{binomial_moment_check, estimate_rho2, BinomialCheck, PairCorrelationTable, PairRow, RadialBins};
pub use poisson::{poisson_tests, poisson_tests_in_bulk, PoissonReport, WindowPoisson, EVIDENCE_LABEL};
pub use stats::{batch_mean, block_jackknife, quantile, upper_95, BLOCKS};
pub use subharmonic::{mean_value_test, sphere_nodes, subharmonicity_test, BallOutcome, SubharmonicReport};
pub use window::Window;

/// CSV rendering of a report.
pub trait Tabular {
    fn csv(&self) -> String;
}
