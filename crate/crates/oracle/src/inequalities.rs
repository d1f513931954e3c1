use coulomb_equilibrium::EquilibriumData;
use coulomb_kernel::{
    g_of_r, harmonic_measure_nodes, poisson_reweight, unit_sphere_rule, Ball, GaussLegendre, SpaceDim,
};
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, Result};
use crate::iso::{dirichlet_point_potential, dirichlet_potential, ISO_NODES};
use crate::quadrature::{ConditionalDensity, QuadratureGas};

/// Violations up to this size (relative to the right side) are quadrature noise.
pub const INEQUALITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InequalityRow {
    pub label: String,
    pub point: Vec<f64>,
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub margin: f64,
}

impl InequalityRow {
    /// (lhs − rhs)/|rhs|, clipped at 0.
    pub fn violation(&self) -> f64 {
        let scale = self.rhs.abs().max(f64::MIN_POSITIVE);
        ((self.lhs - self.rhs) / scale).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationReport {
    pub rows: Vec<InequalityRow>,
    pub max_violation: f64,
    pub holds: bool,
}

impl ViolationReport {
    fn from_rows(rows: Vec<InequalityRow>) -> Self {
        let max_violation = rows.iter().map(InequalityRow::violation).fold(0.0, f64::max);
        ViolationReport { rows, max_violation, holds: max_violation <= INEQUALITY_TOLERANCE }
    }
}

/// Both mean-value inequalities for the (conditional) one-point function at
/// the centre of each ball and at centre + r/3 e₁:
///
///   ρ̃(x) ≤ e^{β h_ω^{c_d^{−1}ΔV − Σδ_{y_j}}(x)} ∫_{∂ω} ρ̃ dω_x,
///   e^{βζ(x)} ρ̃(x) ≤ e^{β h_ω^{μ∞ − Σδ_{y_j}}(x)} ∫_{∂ω} e^{βζ} ρ̃ dω_x.
pub fn check_1pt_iso(
    gas: &QuadratureGas,
    eq: &EquilibriumData,
    balls: &[(Vec<f64>, f64)],
    conditioned: &[Vec<f64>],
) -> Result<ViolationReport> {
    let params = gas.params();
    if params.n > 2 {
        return Err(OracleError::InvalidArgument("the mean-value check needs N ≤ 2".into()));
    }
    let dim = params.dim();
    let n = params.n;
    let beta = params.beta;
    let rho = gas.conditional(conditioned)?;
    let mu = eq.mu_inf(n);
    let cd = coulomb_kernel::fundamental_constant(dim);
    let cond: Vec<&[f64]> = conditioned.iter().map(|c| c.as_slice()).collect();
    let mut rows = Vec::new();
    for (center, radius) in balls {
        let ball = Ball::new(center.clone(), *radius)?;
        let mut probe = center.clone();
        probe[0] += radius / 3.0;
        for x in [center.clone(), probe] {
            if cond.contains(&x.as_slice()) {
                return Err(OracleError::Geometry("evaluation point coincides with a conditioned particle".into()));
            }
            let nodes = poisson_reweight(&ball, &x, &harmonic_measure_nodes(center, *radius, dim, ISO_NODES), dim)?;
            let points = dirichlet_point_potential(&ball, &x, &cond, dim)?;
            let lap = dirichlet_potential(center, *radius, &x, dim, |y| {
                params.potential.laplacian(y).map(|l| l / cd).unwrap_or(0.0)
            })?;
            let lhs = rho.at(&x);
            let avg: f64 = nodes.iter().map(|nd| nd.weight * rho.at(&nd.point)).sum();
            rows.push(InequalityRow {
                label: "laplacian".into(),
                point: x.clone(),
                radius: *radius,
                lhs,
                rhs: (beta * (lap - points)).exp() * avg,
                margin: (beta * (lap - points)).exp() * avg - lhs,
            });
            let background = dirichlet_potential(center, *radius, &x, dim, |y| mu.density(y))?;
            let weighted = |y: &[f64]| (beta * eq.zeta_n(n, y)).exp() * rho.at(y);
            let lhs = weighted(&x);
            let avg: f64 = nodes.iter().map(|nd| nd.weight * weighted(&nd.point)).sum();
            let rhs = (beta * (background - points)).exp() * avg;
            rows.push(InequalityRow { label: "zeta".into(), point: x, radius: *radius, lhs, rhs, margin: rhs - lhs });
        }
    }
    Ok(ViolationReport::from_rows(rows))
}

/// C_ann = 1/(|B₁|(1 − 2^{−d})). From the mean-value inequality on ∂B_s(y)
/// integrated against |S^{d−1}| s^{d−1} ds over s ∈ [r/2, r]:
/// ρ̃(y) |B₁| r^d (1 − 2^{−d}) ≤ e^A ∫_{B_r \ B_{r/2}} ρ̃.
pub fn kpt_annulus_constant(dim: SpaceDim) -> f64 {
    1.0 / (dim.ball_volume() * (1.0 - 0.5f64.powi(dim.get() as i32)))
}

/// C_lap = 1/(2d): the torsion function (s² − |x − y|²)/(2d) of B_s(y) at
/// its centre bounds h_{B_s}^{c_d^{−1}ΔV}(y) by sup(ΔV)₊ s²/(2d) ≤ sup(ΔV)₊ r²/(2d).
pub fn kpt_laplacian_constant(dim: SpaceDim) -> f64 {
    1.0 / (2.0 * dim.get() as f64)
}

fn ball_integral(rho: &ConditionalDensity<'_>, center: &[f64], r: f64, dim: SpaceDim) -> f64 {
    let gl = GaussLegendre::new(32);
    let d = dim.get() as i32;
    let area = dim.sphere_area();
    let dirs = unit_sphere_rule(dim, if dim.is_two() { 64 } else { 128 });
    gl.on(0.0, r)
        .map(|(s, ws)| {
            let shell: f64 = dirs
                .iter()
                .map(|(u, wu)| {
                    let y: Vec<f64> = center.iter().zip(u).map(|(c, e)| c + s * e).collect();
                    wu * rho.at(&y)
                })
                .sum();
            ws * area * s.powi(d - 1) * shell
        })
        .sum()
}

/// sup (ΔV_N)₊ over B_r(y), sampled on the centre and 8 radii × the sphere rule.
fn laplacian_sup(gas: &QuadratureGas, y: &[f64], r: f64) -> f64 {
    let p = &gas.params().potential;
    let dim = gas.params().dim();
    let mut best = p.laplacian(y).unwrap_or(0.0).max(0.0);
    for k in 1..=8 {
        for (u, _) in unit_sphere_rule(dim, 64) {
            let x: Vec<f64> = y.iter().zip(&u).map(|(c, e)| c + r * k as f64 / 8.0 * e).collect();
            if let Ok(l) = p.laplacian(&x) {
                best = best.max(l);
            }
        }
    }
    best
}

/// ρ̃(y) ≤ C_ann r^{−d} e^{A} ∫_{B_r(y)} ρ̃ with
/// A = C_lap β r² sup(ΔV)₊ − β Σ_j max(0, g(y − y_j) − g(r/2)).
pub fn check_kpt_comp(
    gas: &QuadratureGas,
    pairs: &[(Vec<f64>, f64)],
    conditioned: &[Vec<f64>],
) -> Result<ViolationReport> {
    let params = gas.params();
    if params.n > 2 {
        return Err(OracleError::InvalidArgument("the k-point comparison check needs N ≤ 2".into()));
    }
    let dim = params.dim();
    let beta = params.beta;
    let rho = gas.conditional(conditioned)?;
    let c_ann = kpt_annulus_constant(dim);
    let c_lap = kpt_laplacian_constant(dim);
    let rows = pairs
        .iter()
        .map(|(y, r)| {
            let repulsion: f64 = conditioned
                .iter()
                .map(|c| {
                    let dist = coulomb_kernel::dist2(y, c).sqrt();
                    (g_of_r(dist, dim) - g_of_r(0.5 * r, dim)).max(0.0)
                })
                .sum();
            let a = c_lap * beta * r * r * laplacian_sup(gas, y, *r) - beta * repulsion;
            let lhs = rho.at(y);
            let rhs = c_ann * r.powi(-(dim.get() as i32)) * a.exp() * ball_integral(&rho, y, *r, dim);
            InequalityRow { label: "kpt".into(), point: y.clone(), radius: *r, lhs, rhs, margin: rhs - lhs }
        })
        .collect();
    Ok(ViolationReport::from_rows(rows))
}
