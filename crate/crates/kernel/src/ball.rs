//! Dirichlet Green functions of balls and harmonic-measure quadrature.

use std::f64::consts::PI;

use crate::config::{dist2, norm2};
use crate::dim::SpaceDim;
use crate::error::{KernelError, Result};
use crate::quad::GaussLegendre;

/// A ball in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(KernelError::InvalidArgument(format!("ball radius {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist2(x, &self.center) < self.radius * self.radius
    }

    /// Scaled coordinates (x − c)/r.
    fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, c)| (a - c) / self.radius).collect()
    }
}

/// g_ω(x, y) for ω = B_radius(center): c_d times the Dirichlet Green function
/// of −Δ, from the image-charge formula.
pub fn green_function_ball(center: &[f64], radius: f64, x: &[f64], y: &[f64], dim: SpaceDim) -> Result<f64> {
    dim.check(center.len())?;
    dim.check(x.len())?;
    dim.check(y.len())?;
    let ball = Ball::new(center.to_vec(), radius)?;
    for p in [x, y] {
        if !ball.contains(p) {
            return Err(KernelError::OutOfDomain {
                point: p.to_vec(),
                reason: format!("not strictly inside the ball of radius {radius}"),
            });
        }
    }
    if x == y {
        return Err(KernelError::Singular);
    }
    Ok(green_unchecked(&ball, x, y, dim))
}

/// Image-charge formula without domain checks; `x ≠ y` is assumed.
pub(crate) fn green_unchecked(ball: &Ball, x: &[f64], y: &[f64], dim: SpaceDim) -> f64 {
    let xs = ball.local(x);
    let ys = ball.local(y);
    let d2 = dist2(&xs, &ys);
    let dot: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let image = norm2(&xs) * norm2(&ys) - 2.0 * dot + 1.0;
    // Test fixture: flips the sign of the image charge.
    let sign = if cfg!(feature = "mutation-green-sign") { -1.0 } else { 1.0 };
    if dim.is_two() {
        -0.5 * d2.ln() + sign * 0.5 * image.ln()
    } else {
        (1.0 / d2.sqrt() - sign / image.sqrt()) / ball.radius
    }
}

/// h_ω^{δ_y}(x): the Green function when `y` is inside the ball, 0 otherwise.
pub fn green_point_source(ball: &Ball, x: &[f64], y: &[f64], dim: SpaceDim) -> Result<f64> {
    if !ball.contains(y) || !ball.contains(x) {
        return Ok(0.0);
    }
    if x == y {
        return Err(KernelError::Singular);
    }
    Ok(green_unchecked(ball, x, y, dim))
}

/// A quadrature node on a sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNode {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Unit directions and weights (summing to 1) for the uniform measure on S^{d−1}.
///
/// d = 2: `n` equispaced angles. d = 3: the product of an m-point
/// Gauss–Legendre rule in cos θ with 2m equispaced azimuths, m = round(√(n/2)),
/// so n = 512 gives exactly 512 nodes and integrates spherical harmonics of
/// degree ≤ 2m − 1 exactly. The node count is 2m² in general.
pub fn unit_sphere_rule(dim: SpaceDim, n: usize) -> Vec<(Vec<f64>, f64)> {
    let n = n.max(2);
    if dim.is_two() {
        let w = 1.0 / n as f64;
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                (vec![t.cos(), t.sin()], w)
            })
            .collect()
    } else {
        let m = ((n as f64 / 2.0).sqrt().round() as usize).max(1);
        let nphi = 2 * m;
        let gl = GaussLegendre::new(m);
        let mut out = Vec::with_capacity(m * nphi);
        for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..nphi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                out.push((vec![rho * phi.cos(), rho * phi.sin(), *z], 0.5 * wz / nphi as f64));
            }
        }
        out
    }
}

/// Harmonic measure of B_radius(center) seen from the center: the uniform
/// probability on the sphere, discretized by [`unit_sphere_rule`].
pub fn harmonic_measure_nodes(center: &[f64], radius: f64, dim: SpaceDim, n: usize) -> Vec<SphereNode> {
    unit_sphere_rule(dim, n)
        .into_iter()
        .map(|(u, w)| SphereNode { point: center.iter().zip(&u).map(|(c, e)| c + radius * e).collect(), weight: w })
        .collect()
}

/// Reweights center-based sphere nodes to the harmonic measure seen from an
/// interior point `x` (Poisson kernel relative to the uniform measure).
pub fn poisson_reweight(ball: &Ball, x: &[f64], nodes: &[SphereNode], dim: SpaceDim) -> Result<Vec<SphereNode>> {
    if !ball.contains(x) {
        return Err(KernelError::OutOfDomain {
            point: x.to_vec(),
            reason: "harmonic measure needs an interior point".into(),
        });
    }
    let s = ball.radius;
    let off = s * s - dist2(x, &ball.center);
    let d = dim.get() as i32;
    Ok(nodes
        .iter()
        .map(|nd| {
            let r = dist2(x, &nd.point).sqrt();
            SphereNode { point: nd.point.clone(), weight: nd.weight * s.powi(d - 2) * off / r.powi(d) }
        })
        .collect())
}

/// Σ w_k f(y_k).
pub fn sphere_average(nodes: &[SphereNode], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    nodes.iter().map(|n| n.weight * f(&n.point)).sum()
}
