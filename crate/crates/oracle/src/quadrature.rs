use coulomb_estimators::DensityEstimate;
use coulomb_kernel::{g_of_r2, unit_sphere_rule, CartesianGrid, GaussLegendre, SpaceDim};
use coulomb_potential::Domain;
use coulomb_sampler::GasParams;
use rayon::prelude::*;

use crate::error::{OracleError, Result};

/// Gauss–Legendre nodes per panel along each axis.
pub const PANEL_NODES: usize = 8;
/// One-body weight allowed on the edge of the box, relative to the maximum.
pub const BOUNDARY_WEIGHT: f64 = 1e-12;
/// Largest relative change tolerated under one refinement.
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;
pub const MAX_QUADRATURE_N: usize = 3;

/// Tensor-product quadrature of the N-particle Gibbs measure, N ≤ 3.
///
/// Each particle ranges over the same composite Gauss–Legendre grid on a box.
/// One-body Boltzmann factors e^{−βV_N} are cached with the weights; pair
/// factors are evaluated on the fly. Work per density value is m^{d·free}
/// for m nodes per axis and `free` integrated particles.
#[derive(Debug, Clone)]
pub struct QuadratureGas {
    params: GasParams,
    lower: Vec<f64>,
    upper: Vec<f64>,
    panels: usize,
    points: Vec<Vec<f64>>,
    /// Quadrature weight times e^{−βV_N}.
    weights: Vec<f64>,
    partition: f64,
}

fn pair_factor(dim: SpaceDim, beta: f64, a: &[f64], b: &[f64]) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if r2 == 0.0 {
        return 0.0;
    }
    if dim.is_two() {
        r2.powf(0.5 * beta)
    } else {
        (-beta * g_of_r2(r2, dim)).exp()
    }
}

impl QuadratureGas {
    /// `panels` composite panels per axis of PANEL_NODES points each.
    pub fn new(params: GasParams, panels: usize) -> Result<Self> {
        let n = params.n;
        if n == 0 || n > MAX_QUADRATURE_N {
            return Err(OracleError::InvalidArgument(format!(
                "quadrature gases need 1 ≤ N ≤ {MAX_QUADRATURE_N}, got {n}"
            )));
        }
        if !(params.beta >= 0.0) || panels == 0 {
            return Err(OracleError::InvalidArgument("β ≥ 0 and at least one panel required".into()));
        }
        let d = params.dim().get();
        let (lower, upper) = match &params.potential.base().domain {
            Some(Domain::Box { lower, upper }) => {
                let s = params.potential.length_scale();
                (lower.iter().map(|v| v * s).collect(), upper.iter().map(|v| v * s).collect())
            }
            Some(Domain::Ball { radius }) => {
                let r = radius * params.potential.length_scale();
                (vec![-r; d], vec![r; d])
            }
            None => {
                let l = Self::extent(&params)?;
                (vec![-l; d], vec![l; d])
            }
        };
        let mut gas =
            QuadratureGas { params, lower, upper, panels, points: Vec::new(), weights: Vec::new(), partition: 0.0 };
        gas.build();
        gas.partition = gas.normaliser(&[]);
        if !(gas.partition > 0.0 && gas.partition.is_finite()) {
            return Err(OracleError::InvalidArgument(format!("partition sum {}", gas.partition)));
        }
        Ok(gas)
    }

    /// Half-width L where e^{−β(V_N − V_N(0))}, inflated by the largest
    /// possible d = 2 pair gain (2L)^{β(N−1)}, drops below BOUNDARY_WEIGHT.
    fn extent(params: &GasParams) -> Result<f64> {
        if params.beta == 0.0 {
            return Err(OracleError::InvalidArgument("a free gas needs a bounded domain".into()));
        }
        let dim = params.dim();
        let v0 = params.v(&vec![0.0; dim.get()]).unwrap_or(0.0);
        let dirs = unit_sphere_rule(dim, if dim.is_two() { 64 } else { 128 });
        let need = -BOUNDARY_WEIGHT.ln();
        let mut l = 1.0;
        while l < 1e4 {
            let vmin = dirs
                .iter()
                .map(|(u, _)| {
                    let x: Vec<f64> = u.iter().map(|c| c * l).collect();
                    params.v(&x).unwrap_or(f64::INFINITY)
                })
                .fold(f64::INFINITY, f64::min);
            let gain = if dim.is_two() { (params.n as f64 - 1.0) * (2.0 * l).ln().max(0.0) } else { 0.0 };
            if params.beta * (vmin - v0 - gain) >= need {
                return Ok(l);
            }
            l += 0.25;
        }
        Err(OracleError::InvalidArgument("potential does not confine the quadrature box".into()))
    }

    fn build(&mut self) {
        let d = self.params.dim().get();
        let gl = GaussLegendre::new(PANEL_NODES);
        let axes: Vec<Vec<(f64, f64)>> = (0..d)
            .map(|a| {
                let w = (self.upper[a] - self.lower[a]) / self.panels as f64;
                (0..self.panels)
                    .flat_map(|p| {
                        let lo = self.lower[a] + p as f64 * w;
                        gl.on(lo, lo + w).collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        let m = axes[0].len();
        let total = m.pow(d as u32);
        self.points.clear();
        self.weights.clear();
        for k in 0..total {
            let mut idx = k;
            let mut x = Vec::with_capacity(d);
            let mut w = 1.0;
            for axis in &axes {
                let (p, wp) = axis[idx % m];
                idx /= m;
                x.push(p);
                w *= wp;
            }
            let boltz = self.boltzmann(&x);
            self.points.push(x);
            self.weights.push(w * boltz);
        }
    }

    /// e^{−βV_N(x)}, 0 outside the domain.
    pub fn boltzmann(&self, x: &[f64]) -> f64 {
        match self.params.v(x) {
            Some(_) if self.params.beta == 0.0 => 1.0,
            Some(v) => (-self.params.beta * v).exp(),
            None => 0.0,
        }
    }

    pub fn params(&self) -> &GasParams {
        &self.params
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.panels * PANEL_NODES
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Z divided by the N-fold product of nothing: Σ over the tensor grid of
    /// e^{−βH} times weights.
    pub fn partition(&self) -> f64 {
        self.partition
    }

    pub fn refined(&self) -> Result<Self> {
        Self::new(self.params.clone(), 2 * self.panels)
    }

    /// ∫ e^{−βH(x, z_2, …)} over the particles that are neither `x` nor
    /// conditioned, dropping factors that involve only conditioned points.
    pub fn unnormalised(&self, x: &[f64], conditioned: &[Vec<f64>]) -> f64 {
        let dim = self.params.dim();
        let beta = self.params.beta;
        let mut base = self.boltzmann(x);
        if base == 0.0 {
            return 0.0;
        }
        for c in conditioned {
            base *= pair_factor(dim, beta, x, c);
        }
        let free = self.params.n - 1 - conditioned.len();
        let mut fixed: Vec<&[f64]> = Vec::with_capacity(self.params.n);
        fixed.push(x);
        fixed.extend(conditioned.iter().map(|c| c.as_slice()));
        base * self.integrate_free(&mut fixed, free)
    }

    fn integrate_free<'a>(&'a self, fixed: &mut Vec<&'a [f64]>, free: usize) -> f64 {
        if free == 0 {
            return 1.0;
        }
        if free == 1 && fixed.len() == 1 && self.polar_applies() {
            return self.polar_integral(fixed[0]);
        }
        let dim = self.params.dim();
        let beta = self.params.beta;
        let mut total = 0.0;
        for (z, w) in self.points.iter().zip(&self.weights) {
            if *w == 0.0 {
                continue;
            }
            let f: f64 = fixed.iter().map(|p| pair_factor(dim, beta, z, p)).product();
            if f == 0.0 {
                continue;
            }
            fixed.push(z);
            total += w * f * self.integrate_free(fixed, free - 1);
            fixed.pop();
        }
        total
    }

    /// ∫ e^{−βV_N(z)} |z − p|^β dz in polar coordinates about p with
    /// ρ = R s², which takes the pair singularity out of the integrand.
    fn polar_integral(&self, p: &[f64]) -> f64 {
        let dim = self.params.dim();
        let beta = self.params.beta;
        let reach: f64 = p
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(c, (lo, hi))| (c - lo).abs().max((hi - c).abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        let dirs = unit_sphere_rule(dim, 16 * self.panels);
        let gl = GaussLegendre::new(PANEL_NODES);
        let panels = 2 * self.panels;
        let mut total = 0.0;
        for k in 0..panels {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            for (s, ws) in gl.on(a, b) {
                let rho = reach * s * s;
                let jac = 2.0 * reach * s * rho;
                let pair = rho.powf(beta);
                let shell: f64 =
                    dirs.iter().map(|(u, wu)| wu * self.boltzmann(&[p[0] + rho * u[0], p[1] + rho * u[1]])).sum();
                total += ws * jac * pair * dim.sphere_area() * shell;
            }
        }
        total
    }

    /// The d = 2 pair factor |z − p|^β has a cusp at p that tensor rules
    /// resolve slowly; e^{−β/|z − p|} in d = 3 is smooth. A hard domain edge
    /// would put a jump inside the polar rule.
    fn polar_applies(&self) -> bool {
        self.params.dim().is_two() && self.params.beta > 0.0 && self.params.potential.base().domain.is_none()
    }

    /// ∫ unnormalised(x, conditioned) dx, with a parallel map and an
    /// order-fixed sum.
    pub fn normaliser(&self, conditioned: &[Vec<f64>]) -> f64 {
        if conditioned.len() == 1 && self.params.n == 2 && self.polar_applies() {
            return self.polar_integral(&conditioned[0]);
        }
        let parts: Vec<f64> = self
            .points
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, w)| if *w == 0.0 { 0.0 } else { w / self.boltzmann(x) * self.unnormalised(x, conditioned) })
            .collect();
        parts.iter().sum()
    }

    /// The conditional one-point function given fixed particle positions,
    /// normalised to N − #conditioned.
    pub fn conditional(&self, conditioned: &[Vec<f64>]) -> Result<ConditionalDensity<'_>> {
        let d = self.params.dim().get();
        if conditioned.len() >= self.params.n {
            return Err(OracleError::InvalidArgument("at most N − 1 conditioned particles".into()));
        }
        if conditioned.iter().any(|c| c.len() != d) {
            return Err(OracleError::InvalidArgument("conditioned point of wrong dimension".into()));
        }
        let normaliser = if conditioned.is_empty() { self.partition } else { self.normaliser(conditioned) };
        if !(normaliser > 0.0 && normaliser.is_finite()) {
            return Err(OracleError::InvalidArgument(format!("conditional normaliser {normaliser}")));
        }
        Ok(ConditionalDensity {
            gas: self,
            conditioned: conditioned.to_vec(),
            normaliser,
            mass: (self.params.n - conditioned.len()) as f64,
        })
    }
}

/// ρ₁(· | y₂, …, y_k) of a quadrature gas.
#[derive(Debug, Clone)]
pub struct ConditionalDensity<'a> {
    gas: &'a QuadratureGas,
    conditioned: Vec<Vec<f64>>,
    normaliser: f64,
    mass: f64,
}

impl ConditionalDensity<'_> {
    pub fn at(&self, x: &[f64]) -> f64 {
        self.mass * self.gas.unnormalised(x, &self.conditioned) / self.normaliser
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn conditioned(&self) -> &[Vec<f64>] {
        &self.conditioned
    }
}

fn density_on_cells(gas: &QuadratureGas, conditioned: &[Vec<f64>]) -> Result<DensityEstimate> {
    let d = gas.params.dim().get();
    let m = gas.nodes_per_axis();
    let (lo, hi) = gas.bounds();
    let h = (hi[0] - lo[0]) / m as f64;
    if (0..d).any(|a| ((hi[a] - lo[a]) / m as f64 - h).abs() > 1e-12 * h.max(1.0)) {
        return Err(OracleError::InvalidArgument("ρ₁ cells need a cubic box".into()));
    }
    let grid = CartesianGrid::new(lo.to_vec(), h, vec![m; d])?;
    let rho = gas.conditional(conditioned)?;
    let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|k| rho.at(&grid.cell_center(k))).collect();
    let integral = values.iter().sum::<f64>() * grid.cell_volume();
    let std_errors = vec![0.0; values.len()];
    Ok(DensityEstimate { grid, values, std_errors, integral, leakage: 0.0, samples: 0 })
}

/// Exact-to-quadrature ρ₁ (or the conditional ρ₁ given `conditioned`) at
/// the centres of an m^d cell grid over the quadrature box. Fails with
/// GridTooCoarse when one refinement moves any value on a 9^d probe lattice
/// by more than REFINEMENT_TOLERANCE relative to the maximum.
pub fn quadrature_rho1(gas: &QuadratureGas, conditioned: &[Vec<f64>]) -> Result<DensityEstimate> {
    let change = refinement_change(gas, conditioned)?;
    if change > REFINEMENT_TOLERANCE {
        return Err(OracleError::GridTooCoarse { change });
    }
    density_on_cells(gas, conditioned)
}

/// Relative sup change of the conditional ρ₁ on a 9^d probe lattice under
/// one refinement of the quadrature grid.
pub fn refinement_change(gas: &QuadratureGas, conditioned: &[Vec<f64>]) -> Result<f64> {
    let fine = gas.refined()?;
    let a = gas.conditional(conditioned)?;
    let b = fine.conditional(conditioned)?;
    let d = gas.params.dim().get();
    let (lo, hi) = gas.bounds();
    let probes = 9usize.pow(d as u32);
    let (mut top, mut diff) = (0.0_f64, 0.0_f64);
    for k in 0..probes {
        let mut idx = k;
        let x: Vec<f64> = (0..d)
            .map(|ax| {
                let i = idx % 9;
                idx /= 9;
                lo[ax] + (hi[ax] - lo[ax]) * (i as f64 + 0.5) / 9.0
            })
            .collect();
        let (va, vb) = (a.at(&x), b.at(&x));
        top = top.max(va.abs());
        diff = diff.max((va - vb).abs());
    }
    Ok(if top > 0.0 { diff / top } else { 0.0 })
}
