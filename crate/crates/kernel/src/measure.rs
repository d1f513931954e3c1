//! Numerical measures: radial shell profiles and 2D Cartesian cell densities.
//!
//! Radial profiles are piecewise constant in |x|, so Newton's theorem gives
//! their potentials in closed form through prefix sums over the shells.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::config::norm2;
use crate::dim::SpaceDim;
use crate::energy::g_of_r;
use crate::error::{KernelError, Result};
use crate::grid::CartesianGrid;
use crate::quad::GaussLegendre;

/// ∫₀ᵗ g(s) |S^{d−1}| s^{d−1} ds.
#[inline]
pub fn shell_antiderivative(t: f64, dim: SpaceDim) -> f64 {
    if dim.is_two() {
        if t == 0.0 {
            0.0
        } else {
            2.0 * PI * (0.25 * t * t - 0.5 * t * t * t.ln())
        }
    } else {
        2.0 * PI * t * t
    }
}

/// Piecewise-constant radial density with shell edges `0 = r_0 < … < r_K`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    dim: SpaceDim,
    edges: Vec<f64>,
    density: Vec<f64>,
    /// Mass inside `edges[k]`.
    inner_mass: Vec<f64>,
    /// ∫_{|y| ≥ edges[k]} g(y) dμ(y).
    outer_potential: Vec<f64>,
}

impl RadialProfile {
    pub fn new(dim: SpaceDim, edges: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if edges.first() != Some(&0.0) {
            return Err(KernelError::InvalidMeasure("radial edges must start at 0".into()));
        }
        if edges.len() != density.len() + 1 {
            return Err(KernelError::InvalidMeasure(format!("{} edges for {} shells", edges.len(), density.len())));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(KernelError::InvalidMeasure("radial edges must increase".into()));
        }
        if density.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(KernelError::InvalidMeasure("density must be finite and ≥ 0".into()));
        }
        let k = density.len();
        let omega = dim.sphere_area();
        let d = dim.get() as i32;
        let mut inner_mass = vec![0.0; k + 1];
        for i in 0..k {
            let m = density[i] * omega * (edges[i + 1].powi(d) - edges[i].powi(d)) / d as f64;
            inner_mass[i + 1] = inner_mass[i] + m;
        }
        let mut outer_potential = vec![0.0; k + 1];
        for i in (0..k).rev() {
            let part = density[i] * (shell_antiderivative(edges[i + 1], dim) - shell_antiderivative(edges[i], dim));
            outer_potential[i] = outer_potential[i + 1] + part;
        }
        Ok(RadialProfile { dim, edges, density, inner_mass, outer_potential })
    }

    pub fn dim(&self) -> SpaceDim {
        self.dim
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn shells(&self) -> usize {
        self.density.len()
    }

    pub fn outer_radius(&self) -> f64 {
        *self.edges.last().unwrap_or(&0.0)
    }

    pub fn mass(&self) -> f64 {
        *self.inner_mass.last().unwrap_or(&0.0)
    }

    /// Mass of shell `k`.
    pub fn shell_mass(&self, k: usize) -> f64 {
        self.inner_mass[k + 1] - self.inner_mass[k]
    }

    /// Volume of shell `k`.
    pub fn shell_volume(&self, k: usize) -> f64 {
        let d = self.dim.get() as i32;
        self.dim.ball_volume() * (self.edges[k + 1].powi(d) - self.edges[k].powi(d))
    }

    /// Index of the shell containing radius `s`, or `None` beyond the support.
    pub fn shell_of(&self, s: f64) -> Option<usize> {
        if s >= self.outer_radius() || self.density.is_empty() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= s).saturating_sub(1))
    }

    pub fn density_at_radius(&self, s: f64) -> f64 {
        self.shell_of(s).map_or(0.0, |k| self.density[k])
    }

    pub fn mass_within(&self, s: f64) -> f64 {
        match self.shell_of(s) {
            None => self.mass(),
            Some(k) => {
                let d = self.dim.get() as i32;
                self.inner_mass[k]
                    + self.density[k] * self.dim.sphere_area() * (s.powi(d) - self.edges[k].powi(d)) / d as f64
            }
        }
    }

    /// Potential at radius `s` knowing that `s` lies in shell `k`.
    #[inline]
    fn potential_in_shell(&self, k: usize, s: f64) -> f64 {
        let d = self.dim.get() as i32;
        let a = self.edges[k];
        let b = self.edges[k + 1];
        let rho = self.density[k];
        let m = self.inner_mass[k] + rho * self.dim.sphere_area() * (s.powi(d) - a.powi(d)) / d as f64;
        let t =
            self.outer_potential[k + 1] + rho * (shell_antiderivative(b, self.dim) - shell_antiderivative(s, self.dim));
        if s == 0.0 {
            t
        } else {
            g_of_r(s, self.dim) * m + t
        }
    }

    /// h^μ at radius `s`.
    pub fn potential_at_radius(&self, s: f64) -> f64 {
        match self.shell_of(s) {
            Some(k) => self.potential_in_shell(k, s),
            None => {
                let m = self.mass();
                if m == 0.0 {
                    0.0
                } else {
                    m * g_of_r(s, self.dim)
                }
            }
        }
    }

    /// d h^μ / ds at radius `s` (Gauss's law).
    pub fn potential_derivative_at_radius(&self, s: f64) -> f64 {
        let m = self.mass_within(s);
        if self.dim.is_two() {
            -m / s
        } else {
            -m / (s * s)
        }
    }

    /// ∬ g dμ dμ, shell by shell with a 16-point rule.
    pub fn self_energy(&self) -> f64 {
        let gl = GaussLegendre::new(16);
        let omega = self.dim.sphere_area();
        let d = self.dim.get() as i32;
        (0..self.shells())
            .map(|k| {
                let rho = self.density[k];
                if rho == 0.0 {
                    return 0.0;
                }
                rho * gl.integrate(self.edges[k], self.edges[k + 1], |s| {
                    self.potential_in_shell(k, s) * omega * s.powi(d - 1)
                })
            })
            .sum()
    }

    /// The same profile seen at microscopic scale: lengths times `n^{1/d}`,
    /// densities unchanged, mass multiplied by `n`.
    pub fn rescaled(&self, n: f64) -> Self {
        let l = self.dim.length_scale(n);
        let edges = self.edges.iter().map(|e| e * l).collect();
        RadialProfile::new(self.dim, edges, self.density.clone()).expect("rescaling keeps a valid profile")
    }
}

/// Cell-centred density on a 2D Cartesian grid.
#[derive(Debug, Clone)]
pub struct CartesianDensity {
    grid: CartesianGrid,
    density: Vec<f64>,
}

impl CartesianDensity {
    pub fn new(grid: CartesianGrid, density: Vec<f64>) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(KernelError::UnsupportedDim(grid.dim()));
        }
        if density.len() != grid.len() {
            return Err(KernelError::InvalidMeasure(format!(
                "{} density values for {} cells",
                density.len(),
                grid.len()
            )));
        }
        if density.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(KernelError::InvalidMeasure("density must be finite and ≥ 0".into()));
        }
        Ok(CartesianDensity { grid, density })
    }

    pub fn grid(&self) -> &CartesianGrid {
        &self.grid
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// ∫ g over a disk of area h² centred at the singularity.
    fn singular_cell_integral(&self) -> f64 {
        let h = self.grid.spacing;
        let a = h / PI.sqrt();
        h * h * (0.5 - a.ln())
    }

    /// h^μ at an arbitrary point by midpoint quadrature; the cell holding `x`
    /// is replaced by the equal-area disk integral.
    pub fn potential_at(&self, x: &[f64]) -> f64 {
        let h = self.grid.spacing;
        let area = h * h;
        let own = self.grid.locate_cell(x);
        let nx = self.grid.shape[0];
        let mut total = 0.0;
        for (k, &rho) in self.density.iter().enumerate() {
            if rho == 0.0 {
                continue;
            }
            if Some(k) == own {
                total += rho * self.singular_cell_integral();
                continue;
            }
            let cx = self.grid.lower[0] + ((k % nx) as f64 + 0.5) * h;
            let cy = self.grid.lower[1] + ((k / nx) as f64 + 0.5) * h;
            let r2 = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
            total += rho * area * (-0.5 * r2.ln());
        }
        total
    }

    /// h^μ at every cell centre by FFT convolution with the same singular-cell rule.
    pub fn potential_on_cells(&self) -> Vec<f64> {
        let nx = self.grid.shape[0];
        let ny = self.grid.shape[1];
        let h = self.grid.spacing;
        let (px, py) = (2 * nx, 2 * ny);
        let mut kernel = vec![Complex64::new(0.0, 0.0); px * py];
        for j in 0..py {
            let oy = if j < ny {
                j as f64
            } else if j > ny {
                j as f64 - py as f64
            } else {
                continue;
            };
            for i in 0..px {
                let ox = if i < nx {
                    i as f64
                } else if i > nx {
                    i as f64 - px as f64
                } else {
                    continue;
                };
                let v = if i == 0 && j == 0 {
                    self.singular_cell_integral()
                } else {
                    h * h * g_of_r(h * (ox * ox + oy * oy).sqrt(), SpaceDim::TWO)
                };
                kernel[j * px + i] = Complex64::new(v, 0.0);
            }
        }
        let mut data = vec![Complex64::new(0.0, 0.0); px * py];
        for j in 0..ny {
            for i in 0..nx {
                data[j * px + i] = Complex64::new(self.density[j * nx + i], 0.0);
            }
        }
        let mut planner = FftPlanner::new();
        fft2(&mut planner, &mut kernel, px, py, false);
        fft2(&mut planner, &mut data, px, py, false);
        for (a, b) in data.iter_mut().zip(&kernel) {
            *a *= b;
        }
        fft2(&mut planner, &mut data, px, py, true);
        let scale = 1.0 / (px * py) as f64;
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = data[j * px + i].re * scale;
            }
        }
        out
    }

    pub fn density_at(&self, x: &[f64]) -> f64 {
        self.grid.locate_cell(x).map_or(0.0, |k| self.density[k])
    }

    pub fn self_energy(&self) -> f64 {
        let pot = self.potential_on_cells();
        pot.iter().zip(&self.density).map(|(p, r)| p * r).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn rescaled(&self, n: f64) -> Self {
        let l = n.sqrt();
        let grid = CartesianGrid {
            lower: self.grid.lower.iter().map(|v| v * l).collect(),
            spacing: self.grid.spacing * l,
            shape: self.grid.shape.clone(),
        };
        CartesianDensity { grid, density: self.density.clone() }
    }
}

/// In-place 2D FFT of a `px × py` array stored with the first axis fastest.
fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], px: usize, py: usize, inverse: bool) {
    let row = if inverse { planner.plan_fft_inverse(px) } else { planner.plan_fft_forward(px) };
    for chunk in data.chunks_exact_mut(px) {
        row.process(chunk);
    }
    let col = if inverse { planner.plan_fft_inverse(py) } else { planner.plan_fft_forward(py) };
    let mut buf = vec![Complex64::new(0.0, 0.0); py];
    for i in 0..px {
        for j in 0..py {
            buf[j] = data[j * px + i];
        }
        col.process(&mut buf);
        for j in 0..py {
            data[j * px + i] = buf[j];
        }
    }
}

/// Support of a [`DiscreteMeasure`].
#[derive(Debug, Clone)]
pub enum MeasureSupport {
    Radial(RadialProfile),
    Cartesian(CartesianDensity),
}

/// A nonnegative measure with a piecewise-constant density.
#[derive(Debug)]
pub struct DiscreteMeasure {
    dim: SpaceDim,
    support: MeasureSupport,
    total_mass: f64,
    self_energy: OnceLock<f64>,
}

impl Clone for DiscreteMeasure {
    fn clone(&self) -> Self {
        let self_energy = OnceLock::new();
        if let Some(v) = self.self_energy.get() {
            let _ = self_energy.set(*v);
        }
        DiscreteMeasure { dim: self.dim, support: self.support.clone(), total_mass: self.total_mass, self_energy }
    }
}

impl DiscreteMeasure {
    pub fn radial(profile: RadialProfile) -> Self {
        DiscreteMeasure {
            dim: profile.dim(),
            total_mass: profile.mass(),
            support: MeasureSupport::Radial(profile),
            self_energy: OnceLock::new(),
        }
    }

    pub fn cartesian(density: CartesianDensity) -> Self {
        DiscreteMeasure {
            dim: SpaceDim::TWO,
            total_mass: density.mass(),
            support: MeasureSupport::Cartesian(density),
            self_energy: OnceLock::new(),
        }
    }

    /// Uniform measure of the given mass on the centred ball of radius `radius`.
    pub fn uniform_ball(dim: SpaceDim, radius: f64, mass: f64) -> Result<Self> {
        let rho = mass / dim.ball_volume_r(radius);
        Ok(Self::radial(RadialProfile::new(dim, vec![0.0, radius], vec![rho])?))
    }

    /// The zero measure.
    pub fn zero(dim: SpaceDim) -> Self {
        Self::radial(RadialProfile::new(dim, vec![0.0], vec![]).expect("empty profile is valid"))
    }

    pub fn dim(&self) -> SpaceDim {
        self.dim
    }

    pub fn support(&self) -> &MeasureSupport {
        &self.support
    }

    pub fn as_radial(&self) -> Option<&RadialProfile> {
        match &self.support {
            MeasureSupport::Radial(p) => Some(p),
            MeasureSupport::Cartesian(_) => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Density at `x`.
    pub fn density(&self, x: &[f64]) -> f64 {
        match &self.support {
            MeasureSupport::Radial(p) => p.density_at_radius(norm2(x).sqrt()),
            MeasureSupport::Cartesian(c) => c.density_at(x),
        }
    }

    /// Electric potential h^μ(x) = ∫ g(y − x) dμ(y).
    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        self.dim.check(x.len())?;
        Ok(match &self.support {
            MeasureSupport::Radial(p) => p.potential_at_radius(norm2(x).sqrt()),
            MeasureSupport::Cartesian(c) => c.potential_at(x),
        })
    }

    /// ∬ g dμ dμ, computed once and cached.
    pub fn self_energy(&self) -> f64 {
        *self.self_energy.get_or_init(|| match &self.support {
            MeasureSupport::Radial(p) => p.self_energy(),
            MeasureSupport::Cartesian(c) => c.self_energy(),
        })
    }

    /// μ_N(A) = N μ(N^{−1/d} A): the measure at microscopic scale with mass N·mass.
    pub fn rescaled(&self, n: f64) -> Self {
        match &self.support {
            MeasureSupport::Radial(p) => Self::radial(p.rescaled(n)),
            MeasureSupport::Cartesian(c) => Self::cartesian(c.rescaled(n)),
        }
    }
}

/// Plain-data form used for (de)serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureData {
    Radial { dim: SpaceDim, edges: Vec<f64>, density: Vec<f64> },
    Cartesian { grid: CartesianGrid, density: Vec<f64> },
}

impl From<&DiscreteMeasure> for MeasureData {
    fn from(m: &DiscreteMeasure) -> Self {
        match &m.support {
            MeasureSupport::Radial(p) => {
                MeasureData::Radial { dim: p.dim, edges: p.edges.clone(), density: p.density.clone() }
            }
            MeasureSupport::Cartesian(c) => MeasureData::Cartesian { grid: c.grid.clone(), density: c.density.clone() },
        }
    }
}

impl TryFrom<MeasureData> for DiscreteMeasure {
    type Error = KernelError;
    fn try_from(d: MeasureData) -> Result<Self> {
        match d {
            MeasureData::Radial { dim, edges, density } => {
                Ok(DiscreteMeasure::radial(RadialProfile::new(dim, edges, density)?))
            }
            MeasureData::Cartesian { grid, density } => {
                Ok(DiscreteMeasure::cartesian(CartesianDensity::new(grid, density)?))
            }
        }
    }
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureData::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = MeasureData::deserialize(d)?;
        DiscreteMeasure::try_from(data).map_err(serde::de::Error::custom)
    }
}
