//! Closed forms for V₁ = a|x|²: μ∞,1 is uniform on the ball of radius
//! (2a)^{−1/d} with density 2ad/c_d.

use std::sync::Arc;

use coulomb_kernel::{DiscreteMeasure, SpaceDim};
use coulomb_potential::PotentialSpec;

use crate::data::{Droplet, EquilibriumData, SolverLog};
use crate::error::Result;

pub fn droplet_radius(a: f64, dim: SpaceDim) -> f64 {
    (2.0 * a).powf(-1.0 / dim.get() as f64)
}

pub fn droplet_density(a: f64, dim: SpaceDim) -> f64 {
    2.0 * a * dim.get() as f64 / dim.sphere_area()
}

/// c∞,1: ½ − log R in d = 2, 3aR² in d = 3.
pub fn c_inf1(a: f64, dim: SpaceDim) -> f64 {
    let r = droplet_radius(a, dim);
    if dim.is_two() {
        0.5 - r.ln()
    } else {
        3.0 * a * r * r
    }
}

/// ζ₁ at radius r: 0 on the droplet, a r² + g(r) − c outside.
pub fn zeta1(a: f64, dim: SpaceDim, r: f64) -> f64 {
    let big_r = droplet_radius(a, dim);
    if r <= big_r {
        0.0
    } else {
        a * r * r + coulomb_kernel::g_of_r(r, dim) - c_inf1(a, dim)
    }
}

pub(crate) fn quadratic_equilibrium(spec: Arc<PotentialSpec>, a: f64, dim: SpaceDim) -> Result<EquilibriumData> {
    let r = droplet_radius(a, dim);
    let mu = DiscreteMeasure::uniform_ball(dim, r, 1.0)?;
    Ok(EquilibriumData::new(dim, spec, mu, c_inf1(a, dim), Droplet::ball(r), SolverLog::closed_form("quadratic")))
}
