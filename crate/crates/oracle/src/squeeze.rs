use coulomb_equilibrium::EquilibriumData;
use coulomb_kernel::{dist2, g_of_r, unit_sphere_rule, Configuration, DiscreteMeasure, GaussLegendre, SpaceDim};
use coulomb_potential::ScaledPotential;
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, Result};
use crate::iso::jellium;

/// Sphere nodes and radial nodes for shell averages.
const SHELL_DIRECTIONS: usize = 512;
const SHELL_RADII: usize = 16;

/// η = ¼ min(1, min_{j≠i} |x_i − x_j|) over the given index set.
fn truncated_spacing(points: &[&[f64]], i: usize) -> f64 {
    let nearest = points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, p)| dist2(points[i], p).sqrt())
        .fold(f64::INFINITY, f64::min);
    0.25 * nearest.min(1.0)
}

/// Average of f over the shell B_η(x) \ B_{η/2}(x) (uniform probability).
fn shell_average(
    x: &[f64],
    eta: f64,
    dim: SpaceDim,
    dirs: &[(Vec<f64>, f64)],
    mut f: impl FnMut(&[f64]) -> f64,
) -> f64 {
    let gl = GaussLegendre::new(SHELL_RADII);
    let d = dim.get() as i32;
    let volume = dim.ball_volume_r(eta) - dim.ball_volume_r(0.5 * eta);
    let area = dim.sphere_area();
    let mut total = 0.0;
    for (s, ws) in gl.on(0.5 * eta, eta) {
        let mut shell = 0.0;
        for (u, wu) in dirs {
            let y: Vec<f64> = x.iter().zip(u).map(|(a, e)| a + s * e).collect();
            shell += wu * f(&y);
        }
        total += ws * area * s.powi(d - 1) * shell;
    }
    total / volume
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SqueezeReport {
    /// ∫ (F((y, X'), μ∞) + ζ(y) + Σ_{i≥2} ζ(x_i)) ν(dy).
    pub lhs: f64,
    /// (1 + 1/(N−1))(F(X', μ∞) + Σ_{i≥2} ζ(x_i)) − ∫ h^{μ∞} dμ∞ / (2(N−1)).
    pub rhs_main: f64,
    /// lhs − rhs_main.
    pub err: f64,
    /// Σ_{i≥2} (g(η̃_i) + M_{x_i}).
    pub spacing_sum: f64,
    /// err / (1 + spacing_sum/(N−1)), the smallest C in
    /// Err ≤ C + C/(N−1) Σ (g(η̃_i) + M_{x_i}); negative when any C ≥ 0 works.
    pub implied_c: f64,
    pub tilde_eta: Vec<f64>,
}

/// Both sides of the squeezing inequality for X' = (x_2, …, x_N), where the
/// first particle is replaced by ν = (N−1)^{−1} Σ_{i≥2} ν_{x_i, η̃_i}, the
/// average of uniform laws on B_{η̃_i}(x_i) \ B_{η̃_i/2}(x_i).
pub fn check_squeeze(config: &Configuration, eq: &EquilibriumData) -> Result<SqueezeReport> {
    let dim = config.dim();
    let n = config.len();
    if dim.is_two() {
        return Err(OracleError::InvalidArgument("the squeezing check is set in d = 3".into()));
    }
    if n < 3 {
        return Err(OracleError::InvalidArgument(format!("the squeezing check needs N ≥ 3, got {n}")));
    }
    let potential = ScaledPotential::new(eq.potential().clone(), dim, n)?;
    let rest: Vec<&[f64]> = config.points().skip(1).collect();
    let tilde_eta: Vec<f64> = (0..rest.len()).map(|i| truncated_spacing(&rest, i)).collect();
    if let Some(i) = tilde_eta.iter().position(|&e| e == 0.0) {
        return Err(OracleError::DegenerateConfig(format!("particle {} coincides with another", i + 2)));
    }
    let mu = eq.mu_inf(n);
    let reduced = Configuration::from_points(dim, &rest)?;
    let f_rest = jellium(&reduced, &mu)?;
    let zeta_rest: f64 = rest.iter().map(|x| eq.zeta_n_raw(n, x)).sum();
    let dirs = unit_sphere_rule(dim, SHELL_DIRECTIONS);
    let m = (n - 1) as f64;
    let mut added = 0.0;
    for (x, &eta) in rest.iter().zip(&tilde_eta) {
        let mut err = None;
        let avg = shell_average(x, eta, dim, &dirs, |y| {
            let pair: f64 = rest.iter().map(|p| g_of_r(dist2(y, p).sqrt(), dim)).sum();
            let h = mu.potential(y).unwrap_or_else(|e| {
                err = Some(e);
                0.0
            });
            pair - h + eq.zeta_n_raw(n, y)
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        added += avg / m;
    }
    let lhs = f_rest + zeta_rest + added;
    let rhs_main = (1.0 + 1.0 / m) * (f_rest + zeta_rest) - mu.self_energy() / (2.0 * m);
    let err = lhs - rhs_main;
    let mut spacing_sum = 0.0;
    for (x, &eta) in rest.iter().zip(&tilde_eta) {
        spacing_sum += g_of_r(eta, dim) + potential.laplacian_bound(x)?;
    }
    Ok(SqueezeReport { lhs, rhs_main, err, spacing_sum, implied_c: err / (1.0 + spacing_sum / m), tilde_eta })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EtaEnergyReport {
    pub eta: Vec<f64>,
    /// Σ g(η_i).
    pub sum_g_eta: f64,
    /// F(X, μ).
    pub jellium: f64,
    /// (Σ g(η_i) − 2F)/N.
    pub excess_per_particle: f64,
    /// Σ g(η_i) / (2F) when F > 0.
    pub ratio: Option<f64>,
}

/// Σ g(η_i) against 2F(X, μ). Diagnostic only.
pub fn check_eta_energy(config: &Configuration, background: &DiscreteMeasure) -> Result<EtaEnergyReport> {
    let dim = config.dim();
    let pts: Vec<&[f64]> = config.points().collect();
    if pts.is_empty() {
        return Err(OracleError::InvalidArgument("empty configuration".into()));
    }
    let eta: Vec<f64> = (0..pts.len()).map(|i| truncated_spacing(&pts, i)).collect();
    if eta.contains(&0.0) {
        return Err(OracleError::DegenerateConfig("coincident points".into()));
    }
    let sum_g_eta: f64 = eta.iter().map(|&e| g_of_r(e, dim)).sum();
    let f = jellium(config, background)?;
    Ok(EtaEnergyReport {
        eta,
        sum_g_eta,
        jellium: f,
        excess_per_particle: (sum_g_eta - 2.0 * f) / pts.len() as f64,
        ratio: (f > 0.0).then(|| sum_g_eta / (2.0 * f)),
    })
}
