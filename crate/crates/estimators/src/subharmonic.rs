use std::collections::BTreeMap;

use coulomb_equilibrium::EquilibriumData;
use coulomb_kernel::{harmonic_measure_nodes, SpaceDim};
use coulomb_sampler::GasParams;
use serde::{Deserialize, Serialize};

use crate::density::DensityEstimate;
use crate::error::{EstimatorError, Result};
use crate::Tabular;

/// Sphere nodes per test ball: d = 2 equispaced, d = 3 product rule (2·8²).
pub fn sphere_nodes(dim: SpaceDim) -> usize {
    if dim.is_two() {
        64
    } else {
        128
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BallOutcome {
    pub center: Vec<f64>,
    pub radius: f64,
    pub u_center: f64,
    pub u_average: f64,
    pub std_error: f64,
    /// (u(center) − average)/SE; positive values violate the mean-value inequality.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubharmonicReport {
    pub balls: Vec<BallOutcome>,
    pub max_z: f64,
    pub violations_beyond_3se: usize,
}

/// Checks u(c) ≤ ⨍_{∂B_r(c)} u for u = weight · ρ̂₁ on every ball. The
/// standard error of u(c) − average comes from the per-bin errors with the
/// combined interpolation weights of the centre and the sphere nodes.
pub fn mean_value_test(
    rho: &DensityEstimate,
    weight: impl Fn(&[f64]) -> f64,
    balls: &[(Vec<f64>, f64)],
) -> Result<SubharmonicReport> {
    let d = rho.dim();
    let dim = SpaceDim::new(d)?;
    let mut outcomes = Vec::with_capacity(balls.len());
    for (center, radius) in balls {
        if center.len() != d {
            return Err(EstimatorError::DimensionMismatch { samples: d, request: center.len() });
        }
        if *radius < 2.0 * rho.grid.spacing {
            return Err(EstimatorError::Geometry(format!(
                "ball radius {radius} is below two bin widths ({})",
                2.0 * rho.grid.spacing
            )));
        }
        let mut coeff: BTreeMap<usize, f64> = BTreeMap::new();
        let outside = || EstimatorError::Geometry(format!("ball at {center:?} leaves the density grid"));
        let wc = weight(center);
        for (k, w) in rho.interpolation_weights(center).ok_or_else(outside)? {
            *coeff.entry(k).or_default() += wc * w;
        }
        let u_center: f64 = coeff.iter().map(|(k, c)| c * rho.values[*k]).sum();
        let mut u_average = 0.0;
        for node in harmonic_measure_nodes(center, *radius, dim, sphere_nodes(dim)) {
            let wn = weight(&node.point) * node.weight;
            for (k, w) in rho.interpolation_weights(&node.point).ok_or_else(outside)? {
                *coeff.entry(k).or_default() -= wn * w;
                u_average += wn * w * rho.values[k];
            }
        }
        let std_error = coeff.iter().map(|(k, c)| (c * rho.std_errors[*k]).powi(2)).sum::<f64>().sqrt();
        let gap = u_center - u_average;
        let z = if std_error > 0.0 {
            gap / std_error
        } else if gap.abs() <= 1e-9 * u_center.abs().max(1.0) {
            0.0
        } else {
            gap.signum() * f64::INFINITY
        };
        outcomes.push(BallOutcome { center: center.clone(), radius: *radius, u_center, u_average, std_error, z });
    }
    let max_z = outcomes.iter().map(|o| o.z).fold(f64::NEG_INFINITY, f64::max);
    let violations_beyond_3se = outcomes.iter().filter(|o| o.z > 3.0).count();
    Ok(SubharmonicReport { balls: outcomes, max_z, violations_beyond_3se })
}

/// Mean-value test of u = e^{βζ_N} ρ̂₁ on balls outside the rescaled droplet.
pub fn subharmonicity_test(
    rho: &DensityEstimate,
    eq: &EquilibriumData,
    params: &GasParams,
    balls: &[(Vec<f64>, f64)],
) -> Result<SubharmonicReport> {
    if rho.dim() != params.dim().get() || eq.dim() != params.dim() {
        return Err(EstimatorError::DimensionMismatch { samples: rho.dim(), request: params.dim().get() });
    }
    let n = params.n;
    let s = params.potential.length_scale();
    for (c, r) in balls {
        if c.len() != rho.dim() {
            return Err(EstimatorError::DimensionMismatch { samples: rho.dim(), request: c.len() });
        }
        let y: Vec<f64> = c.iter().map(|v| v / s).collect();
        if eq.droplet().distance(&y) * s <= *r {
            return Err(EstimatorError::Geometry(format!("ball at {c:?} of radius {r} meets the droplet")));
        }
    }
    let beta = params.beta;
    mean_value_test(rho, |x| (beta * eq.zeta_n(n, x)).exp(), balls)
}

impl Tabular for SubharmonicReport {
    fn csv(&self) -> String {
        let mut out = String::from("center,radius,u_center,u_average,std_error,z\n");
        for b in &self.balls {
            let c: Vec<String> = b.center.iter().map(|v| v.to_string()).collect();
            out +=
                &format!("\"{}\",{},{},{},{},{}\n", c.join(" "), b.radius, b.u_center, b.u_average, b.std_error, b.z);
        }
        out
    }
}
