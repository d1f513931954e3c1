//! Coulomb kernel substrate: the kernel g, Coulomb and jellium energies,
//! electric potentials of numerical measures, ball Green functions and
//! harmonic-measure quadrature.

pub mod ball;
pub mod config;
pub mod dim;
pub mod energy;
pub mod error;
pub mod grid;
pub mod measure;
pub mod quad;

pub use ball::{
    green_function_ball, green_point_source, harmonic_measure_nodes, poisson_reweight, sphere_average,
    unit_sphere_rule, Ball, SphereNode,
};
pub use config::Configuration;
pub use dim::{fundamental_constant, fundamental_constant_of, SpaceDim};
pub use energy::{
    coulomb_kernel, energy_delta, g_of_r, g_of_r2, interaction_delta, jellium_energy, pair_energy, total_energy,
    Confinement, FreeSpace,
};
pub use error::{KernelError, Result};
pub use grid::{CartesianGrid, RadialGrid};
pub use measure::{CartesianDensity, DiscreteMeasure, MeasureData, MeasureSupport, RadialProfile};
pub use quad::{legendre_with_derivative, GaussLegendre};

/// Electric potential h^ν(x) of a numerical measure.
pub fn electric_potential(measure: &DiscreteMeasure, x: &[f64]) -> Result<f64> {
    measure.potential(x)
}

/// Squared Euclidean distance.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    config::dist2(a, b)
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    config::norm2(a).sqrt()
}
