//! Declarative description of the macroscopic potential V₁.

use std::collections::BTreeMap;
use std::path::Path;

use coulomb_kernel::{CartesianGrid, SpaceDim};
use serde::{Deserialize, Serialize};

use crate::error::{PotentialError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// The functional form of V₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum PotentialKind {
    /// V₁(x) = a|x|².
    Quadratic { coefficient: f64 },
    /// V₁(x) = v(|x|), cubic Hermite interpolation of samples of v and v'.
    RadialProfile {
        radii: Vec<f64>,
        values: Vec<f64>,
        derivatives: Vec<f64>,
        /// v is strictly increasing on [increasing_beyond, ∞).
        #[serde(rename = "increasingBeyond")]
        increasing_beyond: f64,
    },
    /// d = 2 only: node samples on a Cartesian grid, bilinear interpolation.
    GridSampled { grid: CartesianGrid, values: Vec<f64> },
}

/// Assumptions the user asserts about V₁, keyed "A2" … "A7".
pub type DeclaredAssumptions = BTreeMap<String, bool>;

/// Where V₁ may be evaluated. Required for sampled kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Domain {
    Ball { radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// A potential file: `{schemaVersion, kind, parameters, declaredAssumptions, domain}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PotentialSpec {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default)]
    pub declared_assumptions: DeclaredAssumptions,
    #[serde(default)]
    pub domain: Option<Domain>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

impl PotentialSpec {
    pub fn quadratic(coefficient: f64) -> Result<Self> {
        Self::from_kind(PotentialKind::Quadratic { coefficient }, None)
    }

    /// Radial profile from samples of v and v' on `radii` (starting at 0).
    pub fn radial_profile(
        radii: Vec<f64>,
        values: Vec<f64>,
        derivatives: Vec<f64>,
        increasing_beyond: f64,
    ) -> Result<Self> {
        let r_max = *radii.last().unwrap_or(&0.0);
        Self::from_kind(
            PotentialKind::RadialProfile { radii, values, derivatives, increasing_beyond },
            Some(Domain::Ball { radius: r_max }),
        )
    }

    /// Samples a radial function and its derivative on a uniform grid up to `r_max`.
    pub fn radial_from_fn(
        r_max: f64,
        intervals: usize,
        v: impl Fn(f64) -> f64,
        dv: impl Fn(f64) -> f64,
        increasing_beyond: f64,
    ) -> Result<Self> {
        let radii: Vec<f64> = (0..=intervals).map(|k| r_max * k as f64 / intervals as f64).collect();
        let values = radii.iter().map(|&r| v(r)).collect();
        let derivatives = radii.iter().map(|&r| dv(r)).collect();
        Self::radial_profile(radii, values, derivatives, increasing_beyond)
    }

    /// Node samples on a 2D grid; the domain is the grid's node rectangle.
    pub fn grid_sampled(grid: CartesianGrid, values: Vec<f64>) -> Result<Self> {
        let lower = grid.lower.clone();
        let upper = grid.lower.iter().zip(&grid.shape).map(|(l, n)| l + (*n as f64 - 1.0) * grid.spacing).collect();
        Self::from_kind(PotentialKind::GridSampled { grid, values }, Some(Domain::Box { lower, upper }))
    }

    pub fn from_kind(kind: PotentialKind, domain: Option<Domain>) -> Result<Self> {
        let spec = PotentialSpec {
            schema_version: SCHEMA_VERSION,
            kind,
            declared_assumptions: DeclaredAssumptions::new(),
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_declared(mut self, id: &str, holds: bool) -> Self {
        self.declared_assumptions.insert(id.to_string(), holds);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PotentialSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("potential spec serializes")
    }

    /// Checks the invariants of each kind.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PotentialError::InvalidSpec(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schemaVersion {}", self.schema_version));
        }
        match &self.kind {
            PotentialKind::Quadratic { coefficient } => {
                if !(*coefficient > 0.0 && coefficient.is_finite()) {
                    return bad(format!("quadratic coefficient must be > 0, got {coefficient}"));
                }
            }
            PotentialKind::RadialProfile { radii, values, derivatives, increasing_beyond } => {
                if radii.len() < 2 || radii.len() != values.len() || radii.len() != derivatives.len() {
                    return bad("radial profile needs matching radii/values/derivatives (≥ 2)".into());
                }
                if radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("radial grid must start at 0 and increase".into());
                }
                if values.iter().chain(derivatives).any(|v| !v.is_finite()) {
                    return bad("radial profile values must be finite".into());
                }
                let r_max = *radii.last().unwrap();
                if !(*increasing_beyond >= 0.0 && *increasing_beyond < r_max) {
                    return bad(format!("increasingBeyond {increasing_beyond} outside [0, {r_max})"));
                }
                for (k, r) in radii.iter().enumerate() {
                    if *r >= *increasing_beyond && k > 0 && derivatives[k] <= 0.0 {
                        return bad(format!("profile not strictly increasing at r = {r}"));
                    }
                }
                match &self.domain {
                    Some(Domain::Ball { radius }) if *radius <= r_max => {}
                    _ => return bad("radial profile must declare a ball domain within its radii".into()),
                }
            }
            PotentialKind::GridSampled { grid, values } => {
                if grid.dim() != 2 {
                    return Err(PotentialError::UnsupportedDim { kind: "grid-sampled", dim: grid.dim() });
                }
                if grid.shape.iter().any(|&n| n < 3) || values.len() != grid.len() {
                    return bad("grid needs ≥ 3 nodes per axis and one value per node".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("grid values must be finite".into());
                }
                let upper: Vec<f64> =
                    grid.lower.iter().zip(&grid.shape).map(|(l, n)| l + (*n as f64 - 1.0) * grid.spacing).collect();
                match &self.domain {
                    Some(Domain::Box { lower: dl, upper: du })
                        if dl.len() == 2
                            && du.len() == 2
                            && (0..2).all(|i| dl[i] >= grid.lower[i] - 1e-12 && du[i] <= upper[i] + 1e-12) => {}
                    _ => return bad("grid-sampled potential must declare a box domain within its grid".into()),
                }
            }
        }
        Ok(())
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.kind, PotentialKind::GridSampled { .. })
    }

    pub fn check_dim(&self, dim: SpaceDim) -> Result<()> {
        match self.kind {
            PotentialKind::GridSampled { .. } if !dim.is_two() => {
                Err(PotentialError::UnsupportedDim { kind: "grid-sampled", dim: dim.get() })
            }
            _ => Ok(()),
        }
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        match &self.domain {
            None => true,
            Some(Domain::Ball { radius }) => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius,
            Some(Domain::Box { lower, upper }) => {
                x.iter().zip(lower).zip(upper).all(|((v, l), u)| *v >= *l && *v <= *u)
            }
        }
    }

    fn out_of_domain(x: &[f64]) -> PotentialError {
        PotentialError::OutOfDomain { point: x.to_vec() }
    }

    /// V₁(x).
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if !self.in_domain(x) {
            return Err(Self::out_of_domain(x));
        }
        Ok(match &self.kind {
            PotentialKind::Quadratic { coefficient } => coefficient * norm2(x),
            PotentialKind::RadialProfile { radii, values, derivatives, .. } => {
                hermite(radii, values, derivatives, norm2(x).sqrt()).0
            }
            PotentialKind::GridSampled { grid, values } => {
                bilinear(grid, values, x).ok_or_else(|| Self::out_of_domain(x))?
            }
        })
    }

    /// dV₁/dr for radial kinds.
    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::Quadratic { coefficient } => Ok(2.0 * coefficient * r),
            PotentialKind::RadialProfile { radii, values, derivatives, .. } => {
                if r > *radii.last().unwrap() || !self.in_domain(&[r]) {
                    return Err(Self::out_of_domain(&[r]));
                }
                Ok(hermite(radii, values, derivatives, r).1)
            }
            PotentialKind::GridSampled { .. } => {
                Err(PotentialError::InvalidSpec("radial derivative requested for a non-radial potential".into()))
            }
        }
    }

    /// Radial profile value v(r) for radial kinds.
    pub fn radial_value(&self, r: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::GridSampled { .. } => {
                Err(PotentialError::InvalidSpec("radial value requested for a non-radial potential".into()))
            }
            _ => self.value(&[r]),
        }
    }

    /// ΔV₁(x) in dimension `dim`. Analytic for quadratics; for radial samples
    /// v'' + (d−1)v'/r from the Hermite interpolant; for grids a five-point
    /// difference at nodes, bilinearly interpolated.
    pub fn laplacian(&self, x: &[f64], dim: SpaceDim) -> Result<f64> {
        match &self.kind {
            PotentialKind::Quadratic { coefficient } => Ok(2.0 * coefficient * dim.get() as f64),
            PotentialKind::RadialProfile { radii, values, derivatives, .. } => {
                if !self.in_domain(x) {
                    return Err(Self::out_of_domain(x));
                }
                let r = norm2(x).sqrt();
                let (_, d1, d2) = hermite(radii, values, derivatives, r);
                let dm1 = dim.get() as f64 - 1.0;
                if r < 1e-12 {
                    Ok(dim.get() as f64 * d2)
                } else {
                    Ok(d2 + dm1 * d1 / r)
                }
            }
            PotentialKind::GridSampled { grid, values } => {
                grid_laplacian(grid, values, x).ok_or_else(|| Self::out_of_domain(x))
            }
        }
    }
}

#[inline]
fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Cubic Hermite value, first and second derivative at `r`.
fn hermite(radii: &[f64], values: &[f64], derivs: &[f64], r: f64) -> (f64, f64, f64) {
    let k = radii.partition_point(|&t| t <= r).clamp(1, radii.len() - 1) - 1;
    let (a, b) = (radii[k], radii[k + 1]);
    let h = b - a;
    let t = (r - a) / h;
    let (y0, y1, m0, m1) = (values[k], values[k + 1], derivs[k] * h, derivs[k + 1] * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
    let dv = ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * m1)
        / h;
    let d2v = ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1) / (h * h);
    (v, dv, d2v)
}

/// Bilinear interpolation of node values; `None` outside the node rectangle.
fn bilinear(grid: &CartesianGrid, values: &[f64], x: &[f64]) -> Option<f64> {
    interpolate_nodes(grid, x, 0, |i, j| values[j * grid.shape[0] + i])
}

fn interpolate_nodes(grid: &CartesianGrid, x: &[f64], inset: usize, f: impl Fn(usize, usize) -> f64) -> Option<f64> {
    let (nx, ny) = (grid.shape[0], grid.shape[1]);
    let h = grid.spacing;
    let u = (x[0] - grid.lower[0]) / h;
    let v = (x[1] - grid.lower[1]) / h;
    let (lo, hx, hy) = (inset as f64, (nx - 1 - inset) as f64, (ny - 1 - inset) as f64);
    if !(u >= lo - 1e-12 && u <= hx + 1e-12 && v >= lo - 1e-12 && v <= hy + 1e-12) {
        return None;
    }
    let i = (u.floor() as usize).clamp(inset, nx - 2 - inset);
    let j = (v.floor() as usize).clamp(inset, ny - 2 - inset);
    let (s, t) = (u - i as f64, v - j as f64);
    Some(
        (1.0 - s) * (1.0 - t) * f(i, j)
            + s * (1.0 - t) * f(i + 1, j)
            + (1.0 - s) * t * f(i, j + 1)
            + s * t * f(i + 1, j + 1),
    )
}

fn node_laplacian(grid: &CartesianGrid, values: &[f64], i: usize, j: usize) -> f64 {
    let nx = grid.shape[0];
    let at = |a: usize, b: usize| values[b * nx + a];
    (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (grid.spacing * grid.spacing)
}

fn grid_laplacian(grid: &CartesianGrid, values: &[f64], x: &[f64]) -> Option<f64> {
    if grid.shape.iter().any(|&n| n < 4) {
        return None;
    }
    interpolate_nodes(grid, x, 1, |i, j| node_laplacian(grid, values, i, j))
}
