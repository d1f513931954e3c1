//! Thermal equilibrium measure: h^{μ} + V₁ + θ^{−1} log μ = c at N = 1.
//!
//! μ is piecewise constant (radial shells or d = 2 cells). The relation is
//! imposed on cell averages of h + V (8-point Gauss–Legendre per shell, the
//! cell centre on Cartesian grids), and μ extends to a pointwise density by
//! μ(x) = exp(θ(c − V₁(x) − h^{μ}(x))).

use std::sync::Arc;

use coulomb_kernel::{
    CartesianDensity, CartesianGrid, DiscreteMeasure, GaussLegendre, MeasureSupport, RadialProfile, SpaceDim,
};
use coulomb_potential::PotentialSpec;

use crate::data::{measure_integral, scaled_constant, scales, EquilibriumData, SolverLog};
use crate::error::{EquilibriumError, Result};
use crate::grid_spec::{GridSpec, DEFAULT_CARTESIAN_SPACING, DEFAULT_THERMAL_RADIAL_SPACING};
use crate::radial::radial_domain;

pub const THERMAL_TOL: f64 = 1e-8;
pub const MAX_THERMAL_ITERATIONS: usize = 200_000;
/// The grid reaches the radius where e^{−θζ₁} drops below this.
pub const TAIL_WEIGHT: f64 = 1e-12;
const DENSITY_FLOOR: f64 = 1e-300;
const SHELL_NODES: usize = 8;

#[derive(Debug, Clone)]
pub struct ThermalEquilibriumData {
    pub(crate) dim: SpaceDim,
    pub(crate) theta: f64,
    pub(crate) potential: Arc<PotentialSpec>,
    pub(crate) mu: DiscreteMeasure,
    pub(crate) c_theta1: f64,
    pub(crate) log: SolverLog,
}

impl ThermalEquilibriumData {
    pub fn new(
        dim: SpaceDim,
        theta: f64,
        potential: Arc<PotentialSpec>,
        mu: DiscreteMeasure,
        c_theta1: f64,
        log: SolverLog,
    ) -> Self {
        Self { dim, theta, potential, mu, c_theta1, log }
    }

    pub fn dim(&self) -> SpaceDim {
        self.dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    /// μ_θ,1 as a piecewise-constant unit-mass measure.
    pub fn mu_theta1(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn c_theta1(&self) -> f64 {
        self.c_theta1
    }

    pub fn log(&self) -> &SolverLog {
        &self.log
    }

    /// Defining-relation residual reached by the solve.
    pub fn residual(&self) -> f64 {
        self.log.residual
    }

    /// c_θ,N = N^{2/d} c_θ,1 − ½ N log N 1_{d=2}.
    pub fn c_theta(&self, n: usize) -> f64 {
        scaled_constant(self.dim, self.c_theta1, n)
    }

    /// θ(c − V₁(x) − h^{μ}(x)); −∞ outside the potential's domain.
    pub fn log_density1(&self, x: &[f64]) -> f64 {
        match (self.potential.value(x), self.mu.potential(x)) {
            (Ok(v), Ok(h)) => self.theta * (self.c_theta1 - v - h),
            _ => f64::NEG_INFINITY,
        }
    }

    /// Pointwise μ_θ,1(x).
    pub fn density1(&self, x: &[f64]) -> f64 {
        self.log_density1(x).exp()
    }

    /// log μ_θ,N(x) = log μ_θ,1(N^{−1/d} x).
    pub fn log_density_n(&self, n: usize, x: &[f64]) -> f64 {
        let (s, _) = scales(self.dim, n);
        let y: Vec<f64> = x.iter().map(|v| v / s).collect();
        self.log_density1(&y)
    }

    pub fn density_n(&self, n: usize, x: &[f64]) -> f64 {
        self.log_density_n(n, x).exp()
    }

    /// μ_θ,N (mass N, microscopic coordinates).
    pub fn mu_theta(&self, n: usize) -> DiscreteMeasure {
        self.mu.rescaled(n as f64)
    }

    /// ∫ V₁ dμ_θ,1.
    pub fn potential_moment1(&self) -> f64 {
        measure_integral(&self.mu, |x| self.potential.value(x).unwrap_or(f64::NAN))
    }

    /// ∫ μ_θ,1 log μ_θ,1 with the piecewise-constant density.
    pub fn entropy1(&self) -> f64 {
        match self.mu.support() {
            MeasureSupport::Radial(p) => (0..p.shells())
                .map(|k| {
                    let rho = p.densities()[k];
                    if rho > 0.0 {
                        p.shell_mass(k) * rho.ln()
                    } else {
                        0.0
                    }
                })
                .sum(),
            MeasureSupport::Cartesian(c) => {
                c.densities().iter().filter(|r| **r > 0.0).map(|r| r * r.ln()).sum::<f64>() * c.grid().cell_volume()
            }
        }
    }

    /// E(μ_θ,1, V₁) = ½∬ g dμ dμ + ∫ V₁ dμ.
    pub fn energy1(&self) -> f64 {
        0.5 * self.mu.self_energy() + self.potential_moment1()
    }

    /// Free energy at scale N: E(μ_θ,N, V_N) + β^{−1} ∫ μ_θ,N log μ_θ,N with
    /// β = θ N^{−2/d}, i.e. N^{1+2/d}(E₁ + θ^{−1} S₁) − ¼ N² log N 1_{d=2}.
    pub fn free_energy(&self, n: usize) -> f64 {
        let nf = n as f64;
        let mut e = nf.powf(1.0 + self.dim.two_over_d()) * (self.energy1() + self.entropy1() / self.theta);
        if self.dim.is_two() {
            e -= 0.25 * nf * nf * nf.ln();
        }
        e
    }
}

/// Radius where θζ₁ reaches −log(TAIL_WEIGHT), capped by the domain.
fn thermal_extent(eq: &EquilibriumData, theta: f64, cap: f64) -> f64 {
    let target = -TAIL_WEIGHT.ln() / theta;
    let dim = eq.dim().get();
    let zeta = |r: f64| {
        let mut x = vec![0.0; dim];
        x[0] = r;
        eq.zeta1(&x)
    };
    let mut lo = eq.droplet().extent();
    let mut hi = lo.max(0.5);
    while zeta(hi) < target {
        hi *= 1.5;
        if hi >= cap {
            return cap;
        }
    }
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        if zeta(m) < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    (1.1 * hi).min(cap)
}

/// Initial density: μ∞ inside the droplet joined to its largest value times e^{−θζ₁}.
fn initial_density(eq: &EquilibriumData, theta: f64, x: &[f64], peak: f64) -> f64 {
    eq.mu_inf1().density(x).max(peak * (-theta * eq.zeta1(x)).exp()).max(DENSITY_FLOOR)
}

struct FixedPoint {
    rho: Vec<f64>,
    c: f64,
    log: SolverLog,
}

/// Damped iteration ρ ← (1 − s)ρ + s T(ρ), T(ρ) = exp(θ(c − A(ρ))) with c
/// normalizing mass. The step s starts at ½ and halves when the residual grows.
fn iterate(
    theta: f64,
    volumes: &[f64],
    mut rho: Vec<f64>,
    averages: impl Fn(&[f64]) -> Result<Vec<f64>>,
    method: String,
) -> Result<FixedPoint> {
    let mut log = SolverLog { method, ..Default::default() };
    let mut s: f64 = 0.5;
    let mut damping = vec![s];
    let mut prev = f64::INFINITY;
    let normalize = |rho: &mut [f64]| {
        let m: f64 = rho.iter().zip(volumes).map(|(r, v)| r * v).sum();
        for r in rho.iter_mut() {
            *r = (*r / m).max(DENSITY_FLOOR);
        }
    };
    normalize(&mut rho);
    for it in 1..=MAX_THERMAL_ITERATIONS {
        let a = averages(&rho)?;
        let amin = a.iter().copied().fold(f64::INFINITY, f64::min);
        let z: f64 = a.iter().zip(volumes).map(|(ak, v)| v * (-theta * (ak - amin)).exp()).sum();
        let c = amin - z.ln() / theta;
        let target: Vec<f64> = a.iter().map(|ak| (theta * (c - ak)).exp().max(DENSITY_FLOOR)).collect();
        let res = target.iter().zip(&rho).map(|(t, r)| (t.ln() - r.ln()).abs()).fold(0.0, f64::max) / theta;
        log.iterations = it;
        log.residual = res;
        if it % 50 == 1 {
            log.history.push(res);
        }
        if res < THERMAL_TOL {
            log.notes.push(format!("final damping {s}"));
            return Ok(FixedPoint { rho, c, log });
        }
        if res > prev {
            s *= 0.5;
            damping.push(s);
        } else {
            s = (s * 1.05).min(0.5);
        }
        prev = res;
        for (r, t) in rho.iter_mut().zip(&target) {
            *r = (1.0 - s) * *r + s * t;
        }
        normalize(&mut rho);
    }
    Err(EquilibriumError::NonConvergence {
        solver: "thermal fixed point",
        iterations: log.iterations,
        residual: log.residual,
        damping,
    })
}

/// Thermal solve starting from a computed μ∞.
pub fn solve_thermal_from(eq: &EquilibriumData, theta: f64, grid: &GridSpec) -> Result<ThermalEquilibriumData> {
    if !(theta > 2.0 && theta.is_finite()) {
        return Err(EquilibriumError::InvalidArgument(format!("θ = {theta} must exceed 2")));
    }
    let spec = eq.potential_arc();
    let grid = match grid {
        GridSpec::Auto if spec.is_radial() => GridSpec::Radial { spacing: DEFAULT_THERMAL_RADIAL_SPACING, r_max: None },
        GridSpec::Auto => GridSpec::Cartesian { spacing: DEFAULT_CARTESIAN_SPACING, half_width: None },
        g => g.clone(),
    };
    match grid {
        GridSpec::Radial { spacing, r_max } => thermal_radial(eq, spec, theta, spacing, r_max),
        GridSpec::Cartesian { spacing, half_width } => thermal_cartesian(eq, spec, theta, spacing, half_width),
        GridSpec::Auto => unreachable!(),
    }
}

fn thermal_radial(
    eq: &EquilibriumData,
    spec: Arc<PotentialSpec>,
    theta: f64,
    spacing: f64,
    r_max: Option<f64>,
) -> Result<ThermalEquilibriumData> {
    if !spec.is_radial() {
        return Err(EquilibriumError::UnsupportedGeometry("radial thermal grid for a non-radial potential".into()));
    }
    let dim = eq.dim();
    let r_max = r_max.unwrap_or_else(|| thermal_extent(eq, theta, radial_domain(&spec)));
    let k = (r_max / spacing).ceil() as usize;
    let h = r_max / k as f64;
    let edges: Vec<f64> = (0..=k).map(|i| i as f64 * h).collect();
    let gl = GaussLegendre::new(SHELL_NODES);
    let d = dim.get() as i32;
    let omega = dim.sphere_area();
    // Quadrature nodes and normalized weights per shell.
    let nodes: Vec<Vec<(f64, f64)>> = (0..k)
        .map(|i| {
            let pts: Vec<(f64, f64)> =
                gl.on(edges[i], edges[i + 1]).map(|(r, w)| (r, w * omega * r.powi(d - 1))).collect();
            let vol: f64 = pts.iter().map(|p| p.1).sum();
            pts.into_iter().map(|(r, w)| (r, w / vol)).collect()
        })
        .collect();
    let volumes: Vec<f64> = (0..k).map(|i| dim.ball_volume_r(edges[i + 1]) - dim.ball_volume_r(edges[i])).collect();
    let v_avg: Vec<f64> = nodes
        .iter()
        .map(|pts| pts.iter().map(|&(r, w)| Ok(w * spec.radial_value(r)?)).sum::<Result<f64>>())
        .collect::<Result<_>>()?;
    let peak = max_density(eq.mu_inf1());
    let rho0: Vec<f64> = (0..k)
        .map(|i| {
            let mut x = vec![0.0; dim.get()];
            x[0] = 0.5 * (edges[i] + edges[i + 1]);
            initial_density(eq, theta, &x, peak)
        })
        .collect();
    let averages = |rho: &[f64]| -> Result<Vec<f64>> {
        let p = RadialProfile::new(dim, edges.clone(), rho.to_vec())?;
        Ok(nodes
            .iter()
            .zip(&v_avg)
            .map(|(pts, v)| v + pts.iter().map(|&(r, w)| w * p.potential_at_radius(r)).sum::<f64>())
            .collect())
    };
    let fp = iterate(
        theta,
        &volumes,
        rho0,
        averages,
        format!("radial thermal fixed point, θ = {theta}, h = {h}, r_max = {r_max}"),
    )?;
    let mu = DiscreteMeasure::radial(RadialProfile::new(dim, edges, fp.rho)?);
    Ok(ThermalEquilibriumData::new(dim, theta, spec, mu, fp.c, fp.log))
}

fn max_density(mu: &DiscreteMeasure) -> f64 {
    match mu.support() {
        MeasureSupport::Radial(p) => p.densities().iter().copied().fold(0.0, f64::max),
        MeasureSupport::Cartesian(c) => c.densities().iter().copied().fold(0.0, f64::max),
    }
}

fn thermal_cartesian(
    eq: &EquilibriumData,
    spec: Arc<PotentialSpec>,
    theta: f64,
    spacing: f64,
    half_width: Option<f64>,
) -> Result<ThermalEquilibriumData> {
    let dim = eq.dim();
    if !dim.is_two() {
        return Err(EquilibriumError::UnsupportedGeometry("Cartesian thermal solve needs d = 2".into()));
    }
    let grid = match half_width {
        Some(w) => CartesianGrid::centered(2, w, spacing)?,
        None => {
            // Cells inside the potential's domain and the e^{−θζ₁} extent.
            let cap = match &spec.domain {
                Some(coulomb_potential::Domain::Box { lower, upper }) => {
                    (0..2).map(|a| (-lower[a]).min(upper[a])).fold(f64::INFINITY, f64::min)
                }
                Some(coulomb_potential::Domain::Ball { radius }) => radius / std::f64::consts::SQRT_2,
                None => f64::INFINITY,
            };
            let w = thermal_extent(eq, theta, f64::INFINITY).min(cap - spacing);
            CartesianGrid::centered(2, w, spacing)?
        }
    };
    let len = grid.len();
    let centres: Vec<Vec<f64>> = (0..len).map(|k| grid.cell_center(k)).collect();
    let v: Vec<f64> = centres.iter().map(|c| spec.value(c)).collect::<std::result::Result<_, _>>()?;
    let volumes = vec![grid.cell_volume(); len];
    let peak = max_density(eq.mu_inf1());
    let rho0: Vec<f64> = centres.iter().map(|c| initial_density(eq, theta, c, peak)).collect();
    let averages = |rho: &[f64]| -> Result<Vec<f64>> {
        let cd = CartesianDensity::new(grid.clone(), rho.to_vec())?;
        Ok(cd.potential_on_cells().iter().zip(&v).map(|(h, v)| h + v).collect())
    };
    let fp = iterate(
        theta,
        &volumes,
        rho0,
        averages,
        format!("cartesian thermal fixed point, θ = {theta}, h = {spacing}, {}×{} cells", grid.shape[0], grid.shape[1]),
    )?;
    let mu = DiscreteMeasure::cartesian(CartesianDensity::new(grid, fp.rho)?);
    Ok(ThermalEquilibriumData::new(dim, theta, spec, mu, fp.c, fp.log))
}

/// Sample points of a thermal grid (shell midpoints or cell centres).
pub(crate) fn grid_points(mu: &DiscreteMeasure) -> Vec<Vec<f64>> {
    match mu.support() {
        MeasureSupport::Radial(p) => (0..p.shells())
            .map(|k| {
                let mut x = vec![0.0; p.dim().get()];
                x[0] = 0.5 * (p.edges()[k] + p.edges()[k + 1]);
                x
            })
            .collect(),
        MeasureSupport::Cartesian(c) => (0..c.grid().len()).map(|k| c.grid().cell_center(k)).collect(),
    }
}
