//! Brute-force checks of exact identities and inequalities for small
//! Coulomb gases: quadrature one-point functions, the splitting formulas,
//! isotropic averaging, mean-value and k-point comparisons, and the
//! squeezing bound.

mod error;
mod inequalities;
mod iso;
mod quadrature;
mod split;
mod squeeze;

pub use error::{OracleError, Result};
pub use inequalities::{
    check_1pt_iso, check_kpt_comp, kpt_annulus_constant, kpt_laplacian_constant, InequalityRow, ViolationReport,
    INEQUALITY_TOLERANCE,
};
pub use iso::{
    check_iso_adjoint, check_iso_energy, collision_distance, dirichlet_measure_potential, dirichlet_point_potential,
    dirichlet_potential, jellium, AdjointCheck, AdjointRule, IsoEnergyCheck, ISO_NODES,
};
pub use quadrature::{
    quadrature_rho1, refinement_change, ConditionalDensity, QuadratureGas, BOUNDARY_WEIGHT, MAX_QUADRATURE_N,
    PANEL_NODES, REFINEMENT_TOLERANCE,
};
pub use split::{check_split_identity, check_split_thermal, SplitResidual, ThermalSplitResidual};
pub use squeeze::{check_eta_energy, check_squeeze, EtaEnergyReport, SqueezeReport};
