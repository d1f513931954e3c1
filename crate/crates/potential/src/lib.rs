//! Confining potentials V₁, their N-scaling V_N(x) = N^{2/d} V₁(N^{−1/d} x),
//! local Laplacian bounds and checks of the standing assumptions.

mod error;
mod scaled;
mod schedule;
mod spec;
mod validate;

pub use error::{PotentialError, Result};
pub use scaled::{macro_laplacian_bound, ScaledPotential, LAPLACIAN_LATTICE};
pub use schedule::TemperatureSchedule;
pub use spec::{DeclaredAssumptions, Domain, PotentialKind, PotentialSpec, SCHEMA_VERSION};
pub use validate::{
    validate_assumptions, AssumptionCheck, CheckStatus, EquilibriumView, ValidationReport, TAIL_CUTOFF,
};

/// Convenience: V_N(x) for a spec at particle number `n`.
pub fn eval_potential(p: &ScaledPotential, x: &[f64]) -> Result<f64> {
    p.eval(x)
}

/// Convenience: M_{x,N}.
pub fn laplacian_bound(p: &ScaledPotential, x: &[f64]) -> Result<f64> {
    p.laplacian_bound(x)
}
