//! Equilibrium measure μ∞ (obstacle problem), droplet Σ, effective potential
//! ζ and the thermal equilibrium measure μ_θ, all stored at N = 1 and
//! rescaled to particle number N on demand.

mod artifact;
mod cartesian;
pub mod closed_form;
mod data;
mod error;
mod grid_spec;
mod radial;
mod report;
mod thermal;

use std::sync::Arc;

use coulomb_kernel::SpaceDim;
use coulomb_potential::{PotentialKind, PotentialSpec};

pub use artifact::{
    load_equilibrium, load_thermal, save_equilibrium, save_thermal, ArtifactHeader, ArtifactKind, MeasureLayout,
    ARTIFACT_VERSION,
};
pub use cartesian::solve_obstacle_cartesian;
pub use data::{measure_integral, scaled_constant, Droplet, EquilibriumData, SolverLog};
pub use error::{EquilibriumError, Result};
pub use grid_spec::{GridSpec, DEFAULT_CARTESIAN_SPACING, DEFAULT_RADIAL_SPACING, DEFAULT_THERMAL_RADIAL_SPACING};
pub use radial::{solve_obstacle_radial, CONTACT_THRESHOLD, MAX_SWEEPS, OBSTACLE_TOL, SOR_OMEGA};
pub use report::{thermal_properties_report, PropertyReport, INTERIOR_MARGIN};
pub use thermal::{solve_thermal_from, ThermalEquilibriumData, MAX_THERMAL_ITERATIONS, TAIL_WEIGHT, THERMAL_TOL};

/// μ∞,1 for `p`. Quadratic potentials use the closed form; others go to the
/// radial or Cartesian obstacle solver per `grid`.
pub fn solve_equilibrium(p: &PotentialSpec, dim: SpaceDim, grid: &GridSpec) -> Result<EquilibriumData> {
    if let PotentialKind::Quadratic { coefficient } = p.kind {
        if matches!(grid, GridSpec::Auto) {
            return closed_form::quadratic_equilibrium(Arc::new(p.clone()), coefficient, dim);
        }
    }
    solve_equilibrium_numeric(p, dim, grid)
}

/// Like [`solve_equilibrium`] but never takes the closed-form shortcut.
pub fn solve_equilibrium_numeric(p: &PotentialSpec, dim: SpaceDim, grid: &GridSpec) -> Result<EquilibriumData> {
    p.check_dim(dim)?;
    let spec = Arc::new(p.clone());
    match grid {
        GridSpec::Auto if p.is_radial() => solve_obstacle_radial(spec, dim, DEFAULT_RADIAL_SPACING, None),
        GridSpec::Radial { spacing, r_max } => solve_obstacle_radial(spec, dim, *spacing, *r_max),
        _ if !dim.is_two() => {
            Err(EquilibriumError::UnsupportedGeometry("non-radial potentials are supported in d = 2 only".into()))
        }
        GridSpec::Auto => solve_obstacle_cartesian(spec, DEFAULT_CARTESIAN_SPACING, None),
        GridSpec::Cartesian { spacing, half_width } => solve_obstacle_cartesian(spec, *spacing, *half_width),
    }
}

/// ζ_N(x) = N^{2/d} ζ₁(N^{−1/d} x).
pub fn zeta_eval(eq: &EquilibriumData, n: usize, x: &[f64]) -> f64 {
    eq.zeta_n(n, x)
}

/// μ_θ,1 for `p` at inverse temperature parameter θ > 2.
pub fn solve_thermal_equilibrium(
    p: &PotentialSpec,
    dim: SpaceDim,
    theta: f64,
    grid: &GridSpec,
) -> Result<ThermalEquilibriumData> {
    let eq = solve_equilibrium(p, dim, &GridSpec::Auto)?;
    solve_thermal_from(&eq, theta, grid)
}
