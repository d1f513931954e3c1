use coulomb_kernel::SpaceDim;
use serde::{Deserialize, Serialize};

use crate::data::{norm, EquilibriumData};
use crate::thermal::{grid_points, ThermalEquilibriumData};

/// Distance from ∂Σ₁ below which a point is not counted as droplet interior.
pub const INTERIOR_MARGIN: f64 = 0.1;

/// Numerical values of the basic bounds on μ_θ and h^{μ_θ} at N = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyReport {
    pub dim: SpaceDim,
    pub theta: f64,
    pub mass: f64,
    pub residual: f64,
    /// sup μ_θ,1.
    pub mu_sup: f64,
    /// d = 3: min of h^{μ_θ,1} over the grid and out to radius 10.
    pub h_min: Option<f64>,
    /// d = 2: max over 2 ≤ |x| ≤ 10 of |h^{μ_θ,1}(x) + log|x||.
    pub h_log_deviation: Option<f64>,
    /// ∫ h^{μ_θ,1} dμ_θ,1.
    pub self_energy: f64,
    /// θ · sup |h^{μ_θ} − c_θ − h^{μ∞} + c∞| over the grid: the implied constant.
    pub potential_difference_constant: f64,
    /// Range of μ_θ,1(x) / e^{−θζ₁(x)} over the grid.
    pub convert_ratio_min: f64,
    pub convert_ratio_max: f64,
    /// sup |μ_θ,1 − μ∞,1| over grid points at distance ≥ INTERIOR_MARGIN inside Σ₁.
    pub interior_sup_distance: f64,
}

pub fn thermal_properties_report(t: &ThermalEquilibriumData, eq: &EquilibriumData) -> PropertyReport {
    let dim = t.dim();
    let mu = t.mu_theta1();
    let pts = grid_points(mu);
    let theta = t.theta();
    let mut mu_sup = 0.0_f64;
    let mut diff = 0.0_f64;
    let mut rmin = f64::INFINITY;
    let mut rmax = 0.0_f64;
    let mut interior = 0.0_f64;
    let mut h_min = f64::INFINITY;
    for x in &pts {
        let cell = mu.density(x);
        let h_t = mu.potential(x).unwrap_or(f64::NAN);
        let h_inf = eq.mu_inf1().potential(x).unwrap_or(f64::NAN);
        mu_sup = mu_sup.max(cell).max(t.density1(x));
        diff = diff.max((h_t - t.c_theta1() - h_inf + eq.c_inf1()).abs());
        let ratio = (t.log_density1(x) + theta * eq.zeta1(x)).exp();
        rmin = rmin.min(ratio);
        rmax = rmax.max(ratio);
        h_min = h_min.min(h_t);
        if eq.droplet().contains(x) && inside_margin(eq, x) {
            interior = interior.max((cell - eq.mu_inf1().density(x)).abs());
        }
    }
    let far: Vec<Vec<f64>> = (0..=80)
        .flat_map(|k| {
            let r = 2.0 + 8.0 * k as f64 / 80.0;
            (0..8).map(move |a| {
                let phi = std::f64::consts::TAU * a as f64 / 8.0;
                let mut x = vec![0.0; dim.get()];
                x[0] = r * phi.cos();
                x[1] = r * phi.sin();
                x
            })
        })
        .collect();
    let (h_min, h_log_deviation) = if dim.is_two() {
        let dev = far.iter().map(|x| (mu.potential(x).unwrap_or(f64::NAN) + norm(x).ln()).abs()).fold(0.0, f64::max);
        (None, Some(dev))
    } else {
        let m = far.iter().map(|x| mu.potential(x).unwrap_or(f64::NAN)).fold(h_min, f64::min);
        (Some(m), None)
    };
    PropertyReport {
        dim,
        theta,
        mass: mu.total_mass(),
        residual: t.residual(),
        mu_sup,
        h_min,
        h_log_deviation,
        self_energy: mu.self_energy(),
        potential_difference_constant: theta * diff,
        convert_ratio_min: rmin,
        convert_ratio_max: rmax,
        interior_sup_distance: interior,
    }
}

/// Whether the ball of radius INTERIOR_MARGIN about x lies in Σ₁ (checked on 16 directions).
fn inside_margin(eq: &EquilibriumData, x: &[f64]) -> bool {
    (0..16).all(|a| {
        let phi = std::f64::consts::TAU * a as f64 / 16.0;
        let mut y = x.to_vec();
        y[0] += INTERIOR_MARGIN * phi.cos();
        y[1] += INTERIOR_MARGIN * phi.sin();
        eq.droplet().contains(&y)
    })
}
