use coulomb_kernel::{
    g_of_r2, green_point_source, harmonic_measure_nodes, pair_energy, poisson_reweight, unit_sphere_rule, Ball,
    Configuration, DiscreteMeasure, GaussLegendre, SpaceDim,
};
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, Result};

/// Sphere nodes for isotropic averages.
pub const ISO_NODES: usize = 512;
/// Radial Gauss–Legendre nodes for Dirichlet potentials of densities.
const RADIAL_NODES: usize = 48;
/// Directions for Dirichlet potentials of densities, d = 2 and d = 3.
const DIRECTIONS: [usize; 2] = [16384, 8192];

/// h_ω^ν(x) = ∫_ω g_ω(x, y) f(y) dy for ω = B_radius(center) and a bounded
/// density f. Polar coordinates about x with ρ = t s² absorb the kernel
/// singularity.
pub fn dirichlet_potential(
    center: &[f64],
    radius: f64,
    x: &[f64],
    dim: SpaceDim,
    f: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    dirichlet_potential_split(center, radius, x, dim, &f, &|_: &[f64]| Vec::new())
}

/// Dirichlet potential of a measure. Rays are split where they cross the
/// shell edges of a radial measure, so jumps of the density fall between
/// quadrature panels.
pub fn dirichlet_measure_potential(center: &[f64], radius: f64, x: &[f64], mu: &DiscreteMeasure) -> Result<f64> {
    let dim = mu.dim();
    let Some(profile) = mu.as_radial() else {
        return dirichlet_potential(center, radius, x, dim, |y| mu.density(y));
    };
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let crossings = |u: &[f64]| {
        let b: f64 = u.iter().zip(x).map(|(a, c)| a * c).sum();
        let mut out = Vec::new();
        for &e in profile.edges() {
            let disc = b * b - x2 + e * e;
            if disc > 0.0 {
                let root = disc.sqrt();
                out.extend([-b - root, -b + root].into_iter().filter(|&r| r > 0.0));
            }
        }
        out
    };
    dirichlet_potential_split(center, radius, x, dim, &|y| mu.density(y), &crossings)
}

fn dirichlet_potential_split(
    center: &[f64],
    radius: f64,
    x: &[f64],
    dim: SpaceDim,
    f: &dyn Fn(&[f64]) -> f64,
    breaks: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Result<f64> {
    let ball = Ball::new(center.to_vec(), radius)?;
    if !ball.contains(x) {
        return Ok(0.0);
    }
    let d = dim.get();
    let gl = GaussLegendre::new(RADIAL_NODES);
    let area = dim.sphere_area();
    let off: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let off2: f64 = off.iter().map(|v| v * v).sum();
    let mut total = 0.0;
    for (u, wu) in unit_sphere_rule(dim, DIRECTIONS[usize::from(!dim.is_two())]) {
        let b: f64 = u.iter().zip(&off).map(|(a, o)| a * o).sum();
        let t = -b + (b * b - off2 + radius * radius).sqrt();
        let mut cuts: Vec<f64> = breaks(&u).into_iter().filter(|&r| r < t).collect();
        cuts.push(0.0);
        cuts.push(t);
        cuts.sort_by(f64::total_cmp);
        let mut along = 0.0;
        for seg in cuts.windows(2) {
            let (lo, len) = (seg[0], seg[1] - seg[0]);
            if len <= 0.0 {
                continue;
            }
            for (s, ws) in gl.on(0.0, 1.0) {
                let rho = lo + len * s * s;
                let y: Vec<f64> = x.iter().zip(&u).map(|(a, e)| a + rho * e).collect();
                let dens = f(&y);
                if dens == 0.0 {
                    continue;
                }
                let g = green_point_source(&ball, x, &y, dim)?;
                along += ws * 2.0 * len * s * rho.powi(d as i32 - 1) * g * dens;
            }
        }
        total += wu * area * along;
    }
    Ok(total)
}

/// h_ω^{Σ δ_{y_j}}(x) over the points strictly inside ω.
pub fn dirichlet_point_potential(ball: &Ball, x: &[f64], points: &[&[f64]], dim: SpaceDim) -> Result<f64> {
    points.iter().map(|y| green_point_source(ball, x, y, dim).map_err(OracleError::from)).sum()
}

/// F(X, μ) = Σ_{i<j} g(x_i − x_j) − Σ h^μ(x_i) + ½∬ g dμ dμ, for any mass of μ.
pub fn jellium(config: &Configuration, mu: &DiscreteMeasure) -> Result<f64> {
    let h: f64 = config.points().map(|p| mu.potential(p)).sum::<std::result::Result<f64, _>>()?;
    Ok(pair_energy(config)? - h + 0.5 * mu.self_energy())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IsoEnergyCheck {
    pub index: usize,
    /// Iso_{ω,i} F(X, μ) by harmonic-measure quadrature.
    pub iso_average: f64,
    pub jellium: f64,
    /// h_ω^{Σ_{j≠i} δ_{x_j} − μ}(x_i).
    pub correction: f64,
    pub residual: f64,
}

/// Four node spacings of the ISO_NODES rule on a sphere of this radius.
/// Charges closer to the sphere than this are not resolved by the rule.
pub fn collision_distance(radius: f64, dim: SpaceDim) -> f64 {
    let d = dim.get() as f64;
    let area = dim.sphere_area() * radius.powf(d - 1.0);
    4.0 * (area / ISO_NODES as f64).powf(1.0 / (d - 1.0))
}

/// Compares the isotropic average of F(·, μ) in particle i over ω =
/// B_radius(center) with F − h_ω^{Σ_{j≠i} δ_{x_j} − μ}(x_i).
pub fn check_iso_energy(
    config: &Configuration,
    index: usize,
    center: &[f64],
    radius: f64,
    background: &DiscreteMeasure,
) -> Result<IsoEnergyCheck> {
    let dim = config.dim();
    if index >= config.len() {
        return Err(OracleError::InvalidArgument(format!("index {index} out of range")));
    }
    let ball = Ball::new(center.to_vec(), radius)?;
    let xi = config.point(index).to_vec();
    if !ball.contains(&xi) {
        return Err(OracleError::Geometry("the averaged particle must lie inside the ball".into()));
    }
    let others: Vec<&[f64]> = config.points().enumerate().filter(|(j, _)| *j != index).map(|(_, p)| p).collect();
    let collision = collision_distance(radius, dim);
    for p in &others {
        let r = p.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        if (r - radius).abs() <= collision {
            return Err(OracleError::Geometry(format!(
                "particle at {p:?} is within {collision:.3e} of the sphere, closer than the node rule resolves"
            )));
        }
    }
    let nodes = poisson_reweight(&ball, &xi, &harmonic_measure_nodes(center, radius, dim, ISO_NODES), dim)?;
    let f0 = jellium(config, background)?;
    let h_i = background.potential(&xi)?;
    let pair_i: f64 = others.iter().map(|p| g_of_r2(coulomb_kernel::dist2(&xi, p), dim)).sum();
    let mut iso = 0.0;
    for nd in &nodes {
        let pair_y: f64 = others.iter().map(|p| g_of_r2(coulomb_kernel::dist2(&nd.point, p), dim)).sum();
        let h_y = background.potential(&nd.point)?;
        iso += nd.weight * (f0 + pair_y - pair_i - (h_y - h_i));
    }
    let points = dirichlet_point_potential(&ball, &xi, &others, dim)?;
    let smooth = dirichlet_measure_potential(center, radius, &xi, background)?;
    let correction = points - smooth;
    Ok(IsoEnergyCheck { index, iso_average: iso, jellium: f0, correction, residual: (iso - (f0 - correction)).abs() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdjointCheck {
    /// ∫_ω F · Iso G.
    pub volume_side: f64,
    /// ∫_{∂ω} Iso*F · G.
    pub boundary_side: f64,
    pub residual: f64,
    /// |volume side − volume side at half resolution|.
    pub quadrature_error: f64,
}

/// Volume rule: `radial` Gauss–Legendre radii times `angular` directions;
/// boundary rule: `boundary` sphere nodes. Both sides use the same rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdjointRule {
    pub radial: usize,
    pub angular: usize,
    pub boundary: usize,
}

impl Default for AdjointRule {
    fn default() -> Self {
        AdjointRule { radial: 256, angular: 256, boundary: 512 }
    }
}

fn volume_nodes(center: &[f64], radius: f64, dim: SpaceDim, rule: AdjointRule) -> Vec<(Vec<f64>, f64)> {
    let gl = GaussLegendre::new(rule.radial);
    let d = dim.get() as i32;
    let area = dim.sphere_area();
    let dirs = unit_sphere_rule(dim, rule.angular);
    let mut out = Vec::with_capacity(rule.radial * dirs.len());
    for (r, wr) in gl.on(0.0, radius) {
        for (u, wu) in &dirs {
            let x = center.iter().zip(u).map(|(c, e)| c + r * e).collect();
            out.push((x, wr * r.powi(d - 1) * wu * area));
        }
    }
    out
}

fn poisson_kernel(center: &[f64], radius: f64, x: &[f64], z: &[f64], d: i32) -> f64 {
    let off = radius * radius - coulomb_kernel::dist2(x, center);
    radius.powi(d - 2) * off / coulomb_kernel::dist2(x, z).sqrt().powi(d)
}

fn adjoint_sides(
    center: &[f64],
    radius: f64,
    dim: SpaceDim,
    f: &dyn Fn(&[f64]) -> f64,
    g: &dyn Fn(&[f64]) -> f64,
    rule: AdjointRule,
) -> (f64, f64) {
    let d = dim.get() as i32;
    let vol = volume_nodes(center, radius, dim, rule);
    let bnd = harmonic_measure_nodes(center, radius, dim, rule.boundary);
    let g_bnd: Vec<f64> = bnd.iter().map(|b| g(&b.point)).collect();
    // Discrete harmonic measure from each volume node, renormalised to a
    // probability: near the sphere the Poisson kernel is sharper than the
    // boundary rule.
    let mut volume_side = 0.0;
    let mut iso_star = vec![0.0; bnd.len()];
    for (x, w) in &vol {
        let kernel: Vec<f64> = bnd.iter().map(|b| b.weight * poisson_kernel(center, radius, x, &b.point, d)).collect();
        let total: f64 = kernel.iter().sum();
        let fx = w * f(x);
        for (k, (p, gb)) in kernel.iter().zip(&g_bnd).enumerate() {
            volume_side += fx * p / total * gb;
            iso_star[k] += fx * p / total;
        }
    }
    let boundary_side = iso_star.iter().zip(&g_bnd).map(|(i, gb)| i * gb).sum();
    (volume_side, boundary_side)
}

/// ∫_ω F Iso G against ∫_{∂ω} (Iso*F) G for ω = B_radius(center).
pub fn check_iso_adjoint(
    center: &[f64],
    radius: f64,
    dim: SpaceDim,
    f: impl Fn(&[f64]) -> f64,
    g: impl Fn(&[f64]) -> f64,
    rule: AdjointRule,
) -> Result<AdjointCheck> {
    if center.len() != dim.get() || !(radius > 0.0) {
        return Err(OracleError::InvalidArgument(format!("ball of radius {radius} about {center:?}")));
    }
    let (volume_side, boundary_side) = adjoint_sides(center, radius, dim, &f, &g, rule);
    let half = AdjointRule { radial: rule.radial / 2, angular: rule.angular / 2, boundary: rule.boundary / 2 };
    let (coarse, _) = adjoint_sides(center, radius, dim, &f, &g, half);
    Ok(AdjointCheck {
        volume_side,
        boundary_side,
        residual: (volume_side - boundary_side).abs(),
        quadrature_error: (volume_side - coarse).abs(),
    })
}
