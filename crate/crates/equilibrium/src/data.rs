use std::sync::Arc;

use coulomb_kernel::{CartesianGrid, DiscreteMeasure, MeasureSupport, SpaceDim};
use coulomb_potential::{EquilibriumView, PotentialSpec};
use serde::{Deserialize, Serialize};

/// Support Σ₁ of μ∞,1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Droplet {
    /// Union of radial intervals [a, b] in |x|.
    Radial { intervals: Vec<[f64; 2]> },
    /// Cells (d = 2) flagged as carrying mass.
    Cartesian { grid: CartesianGrid, mask: Vec<bool> },
}

impl Droplet {
    pub fn ball(radius: f64) -> Self {
        Droplet::Radial { intervals: vec![[0.0, radius]] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Droplet::Radial { intervals } => {
                let r = norm(x);
                intervals.iter().any(|[a, b]| r >= *a && r <= *b)
            }
            Droplet::Cartesian { grid, mask } => grid.locate_cell(x).is_some_and(|k| mask[k]),
        }
    }

    /// dist(x, Σ₁).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Droplet::Radial { intervals } => {
                let r = norm(x);
                intervals
                    .iter()
                    .map(|[a, b]| {
                        if r < *a {
                            a - r
                        } else if r > *b {
                            r - b
                        } else {
                            0.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            Droplet::Cartesian { grid, mask } => {
                if self.contains(x) {
                    return 0.0;
                }
                // Distance to the nearest flagged cell, measured to its closest point.
                let h = grid.spacing;
                mask.iter()
                    .enumerate()
                    .filter(|(_, m)| **m)
                    .map(|(k, _)| {
                        let c = grid.cell_center(k);
                        let dx = ((x[0] - c[0]).abs() - 0.5 * h).max(0.0);
                        let dy = ((x[1] - c[1]).abs() - 0.5 * h).max(0.0);
                        (dx * dx + dy * dy).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Radius of a centred ball containing Σ₁.
    pub fn extent(&self) -> f64 {
        match self {
            Droplet::Radial { intervals } => intervals.iter().map(|[_, b]| *b).fold(0.0, f64::max),
            Droplet::Cartesian { grid, mask } => {
                let h = grid.spacing;
                mask.iter()
                    .enumerate()
                    .filter(|(_, m)| **m)
                    .map(|(k, _)| norm(&grid.cell_center(k)) + h / std::f64::consts::SQRT_2)
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Volume of Σ₁.
    pub fn volume(&self, dim: SpaceDim) -> f64 {
        match self {
            Droplet::Radial { intervals } => {
                intervals.iter().map(|[a, b]| dim.ball_volume_r(*b) - dim.ball_volume_r(*a)).sum()
            }
            Droplet::Cartesian { grid, mask } => mask.iter().filter(|m| **m).count() as f64 * grid.cell_volume(),
        }
    }
}

#[inline]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Convergence record of a solve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverLog {
    pub method: String,
    pub iterations: usize,
    pub residual: f64,
    /// Residual every few iterations.
    pub history: Vec<f64>,
    pub notes: Vec<String>,
}

impl SolverLog {
    pub fn closed_form(what: &str) -> Self {
        SolverLog { method: format!("closed form ({what})"), ..Default::default() }
    }
}

/// μ∞,1, its droplet and c∞,1. N-scale quantities are derived on demand.
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    pub(crate) dim: SpaceDim,
    pub(crate) potential: Arc<PotentialSpec>,
    pub(crate) mu: DiscreteMeasure,
    pub(crate) c_inf1: f64,
    pub(crate) droplet: Droplet,
    pub(crate) log: SolverLog,
}

impl EquilibriumData {
    pub fn new(
        dim: SpaceDim,
        potential: Arc<PotentialSpec>,
        mu: DiscreteMeasure,
        c_inf1: f64,
        droplet: Droplet,
        log: SolverLog,
    ) -> Self {
        Self { dim, potential, mu, c_inf1, droplet, log }
    }

    pub fn dim(&self) -> SpaceDim {
        self.dim
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn potential_arc(&self) -> Arc<PotentialSpec> {
        self.potential.clone()
    }

    /// μ∞,1 (unit mass, macroscopic coordinates).
    pub fn mu_inf1(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn c_inf1(&self) -> f64 {
        self.c_inf1
    }

    pub fn droplet(&self) -> &Droplet {
        &self.droplet
    }

    pub fn log(&self) -> &SolverLog {
        &self.log
    }

    /// h^{μ∞,1}(x) + V₁(x) − c∞,1 without clamping; +∞ outside the potential's domain.
    pub fn zeta1_raw(&self, x: &[f64]) -> f64 {
        match (self.mu.potential(x), self.potential.value(x)) {
            (Ok(h), Ok(v)) => h + v - self.c_inf1,
            _ => f64::INFINITY,
        }
    }

    /// ζ₁(x), clamped at 0.
    pub fn zeta1(&self, x: &[f64]) -> f64 {
        self.zeta1_raw(x).max(0.0)
    }

    /// ζ_N(x) = N^{2/d} ζ₁(N^{−1/d} x).
    pub fn zeta_n(&self, n: usize, x: &[f64]) -> f64 {
        let (s, e) = scales(self.dim, n);
        let y: Vec<f64> = x.iter().map(|v| v / s).collect();
        e * self.zeta1(&y)
    }

    /// Unclamped ζ_N.
    pub fn zeta_n_raw(&self, n: usize, x: &[f64]) -> f64 {
        let (s, e) = scales(self.dim, n);
        let y: Vec<f64> = x.iter().map(|v| v / s).collect();
        e * self.zeta1_raw(&y)
    }

    /// c∞,N = N^{2/d} c∞,1 − ½ N log N 1_{d=2}.
    pub fn c_inf(&self, n: usize) -> f64 {
        scaled_constant(self.dim, self.c_inf1, n)
    }

    /// μ∞,N (mass N, microscopic coordinates).
    pub fn mu_inf(&self, n: usize) -> DiscreteMeasure {
        self.mu.rescaled(n as f64)
    }

    /// ∫ V₁ dμ∞,1.
    pub fn potential_moment1(&self) -> f64 {
        measure_integral(&self.mu, |x| self.potential.value(x).unwrap_or(f64::NAN))
    }

    /// E(μ∞,1, V₁) = ½∬ g dμ dμ + ∫ V₁ dμ.
    pub fn energy1(&self) -> f64 {
        0.5 * self.mu.self_energy() + self.potential_moment1()
    }

    /// E(μ∞,N, V_N) = N^{1+2/d} E₁ − ¼ N² log N 1_{d=2}.
    pub fn energy(&self, n: usize) -> f64 {
        let nf = n as f64;
        let mut e = nf.powf(1.0 + self.dim.two_over_d()) * self.energy1();
        if self.dim.is_two() {
            e -= 0.25 * nf * nf * nf.ln();
        }
        e
    }

    /// Microscopic droplet membership.
    pub fn in_droplet_n(&self, n: usize, x: &[f64]) -> bool {
        let s = self.dim.length_scale(n as f64);
        let y: Vec<f64> = x.iter().map(|v| v / s).collect();
        self.droplet.contains(&y)
    }
}

impl EquilibriumView for EquilibriumData {
    fn zeta1(&self, x: &[f64]) -> f64 {
        EquilibriumData::zeta1(self, x)
    }

    fn distance_to_droplet(&self, x: &[f64]) -> f64 {
        self.droplet.distance(x)
    }

    fn droplet_extent(&self) -> f64 {
        self.droplet.extent()
    }
}

/// (N^{1/d}, N^{2/d}).
pub(crate) fn scales(dim: SpaceDim, n: usize) -> (f64, f64) {
    let nf = n as f64;
    (dim.length_scale(nf), nf.powf(dim.two_over_d()))
}

/// N^{2/d} c₁ − ½ N log N 1_{d=2}.
pub fn scaled_constant(dim: SpaceDim, c1: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut c = nf.powf(dim.two_over_d()) * c1;
    if dim.is_two() {
        c -= 0.5 * nf * nf.ln();
    }
    c
}

/// ∫ f dμ: 16-point Gauss–Legendre per shell for radial measures (f is then
/// assumed radial and sampled along the first axis), midpoint rule for
/// Cartesian ones.
pub fn measure_integral(mu: &DiscreteMeasure, f: impl Fn(&[f64]) -> f64) -> f64 {
    match mu.support() {
        MeasureSupport::Radial(p) => {
            let dim = p.dim();
            let gl = coulomb_kernel::GaussLegendre::new(16);
            let omega = dim.sphere_area();
            let d = dim.get() as i32;
            let mut x = vec![0.0; dim.get()];
            (0..p.shells())
                .map(|k| {
                    let rho = p.densities()[k];
                    if rho == 0.0 {
                        return 0.0;
                    }
                    rho * gl.integrate(p.edges()[k], p.edges()[k + 1], |r| {
                        x[0] = r;
                        f(&x) * omega * r.powi(d - 1)
                    })
                })
                .sum()
        }
        MeasureSupport::Cartesian(c) => {
            let g = c.grid();
            c.densities()
                .iter()
                .enumerate()
                .filter(|(_, r)| **r > 0.0)
                .map(|(k, r)| r * f(&g.cell_center(k)))
                .sum::<f64>()
                * g.cell_volume()
        }
    }
}
