use coulomb_equilibrium::EquilibriumData;
use coulomb_kernel::GaussLegendre;
use coulomb_sampler::{GasParams, SampleSet};
use serde::{Deserialize, Serialize};

use crate::counts::check_samples;
use crate::density::DensityEstimate;
use crate::error::{EstimatorError, Result};
use crate::stats::upper_95;
use crate::Tabular;

/// Exterior shells with fewer expected points than this are reported but
/// left out of the supremum.
pub const MIN_SHELL_COUNT: f64 = 20.0;
/// Integrals of e^{−βζ} stop where βζ_N exceeds this.
const TAIL_EXPONENT: f64 = 80.0;
const PANEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShellRow {
    pub r_lo: f64,
    pub r_hi: f64,
    pub bins: usize,
    pub exterior: bool,
    /// Σ ρ̂₁ h^d times the number of samples: points observed in the shell.
    pub observed: f64,
    pub resolved: bool,
    pub mean_q: f64,
    pub max_q: f64,
}

/// q = ρ̂₁ e^{βζ_N} on radial shells about the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileReport {
    pub shells: Vec<ShellRow>,
    /// Largest shell mean of q over resolved exterior shells.
    pub sup_exterior_q: f64,
    /// Largest ρ̂₁ over bins centred in the droplet.
    pub max_interior_rho: f64,
    pub ratio: f64,
    /// (sup q)^{1/(1+β)} over interior bins and resolved exterior shells.
    pub implied_c: f64,
}

fn micro_to_macro(params: &GasParams, x: &[f64]) -> Vec<f64> {
    params.potential.to_macro(x)
}

pub fn confinement_profile(rho: &DensityEstimate, eq: &EquilibriumData, params: &GasParams) -> Result<ProfileReport> {
    if rho.dim() != params.dim().get() {
        return Err(EstimatorError::DimensionMismatch { samples: rho.dim(), request: params.dim().get() });
    }
    let n = params.n;
    let beta = params.beta;
    let h = rho.grid.spacing;
    let vol = rho.grid.cell_volume();
    let half = rho.grid.upper()[0];
    let shells = (half / h).floor() as usize;
    let mut rows: Vec<ShellRow> = (0..shells)
        .map(|k| ShellRow {
            r_lo: k as f64 * h,
            r_hi: (k + 1) as f64 * h,
            bins: 0,
            exterior: true,
            observed: 0.0,
            resolved: false,
            mean_q: 0.0,
            max_q: 0.0,
        })
        .collect();
    let mut max_interior_rho = 0.0_f64;
    let mut max_interior_q = 0.0_f64;
    for k in 0..rho.grid.len() {
        let c = rho.grid.cell_center(k);
        let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let inside = eq.droplet().contains(&micro_to_macro(params, &c));
        let q = if rho.values[k] > 0.0 { rho.values[k] * (beta * eq.zeta_n(n, &c)).exp() } else { 0.0 };
        if inside {
            max_interior_rho = max_interior_rho.max(rho.values[k]);
            max_interior_q = max_interior_q.max(q);
        }
        let s = (r / h) as usize;
        if s < rows.len() {
            let row = &mut rows[s];
            row.bins += 1;
            row.exterior &= !inside;
            row.observed += rho.values[k] * vol * rho.samples as f64;
            row.mean_q += q;
            row.max_q = row.max_q.max(q);
        }
    }
    for row in &mut rows {
        if row.bins > 0 {
            row.mean_q /= row.bins as f64;
        }
        row.resolved = row.observed >= MIN_SHELL_COUNT;
    }
    let sup_exterior_q = rows.iter().filter(|r| r.exterior && r.resolved).map(|r| r.mean_q).fold(0.0, f64::max);
    let sup_q = rows.iter().filter(|r| r.exterior && r.resolved).map(|r| r.max_q).fold(max_interior_q, f64::max);
    Ok(ProfileReport {
        shells: rows,
        sup_exterior_q,
        max_interior_rho,
        ratio: sup_exterior_q / max_interior_rho,
        implied_c: sup_q.powf(1.0 / (1.0 + beta)),
    })
}

impl Tabular for ProfileReport {
    fn csv(&self) -> String {
        let mut out = String::from("r_lo,r_hi,bins,exterior,observed,resolved,mean_q,max_q\n");
        for r in &self.shells {
            out += &format!(
                "{},{},{},{},{},{},{},{}\n",
                r.r_lo, r.r_hi, r.bins, r.exterior, r.observed, r.resolved, r.mean_q, r.max_q
            );
        }
        out
    }
}

/// ∫ f over R^d in microscopic coordinates, out to the radius where βζ_N
/// exceeds TAIL_EXPONENT. Radial potentials reduce to one dimension; the
/// rest use a midpoint sum with spacing PANEL.
pub fn space_integral(eq: &EquilibriumData, params: &GasParams, f: impl Fn(&[f64], f64) -> f64) -> f64 {
    let n = params.n;
    let d = params.dim().get();
    let beta = params.beta.max(1e-12);
    let s = params.potential.length_scale();
    let zeta = |x: &[f64]| eq.zeta_n(n, x);
    let along = |r: f64| {
        let mut x = vec![0.0; d];
        x[0] = r;
        x
    };
    let mut r_far = eq.droplet().extent() * s + 1.0;
    while beta * zeta(&along(r_far)) < TAIL_EXPONENT && r_far < 1e3 * s {
        r_far += 0.25;
    }
    if eq.potential().is_radial() {
        let area = params.dim().sphere_area();
        let gl = GaussLegendre::new(8);
        let panels = (r_far / PANEL).ceil() as usize;
        let g = |r: f64| {
            let x = along(r);
            f(&x, zeta(&x)) * area * r.powi(d as i32 - 1)
        };
        (0..panels)
            .map(|k| {
                let (a, b) = (k as f64 * PANEL, ((k + 1) as f64 * PANEL).min(r_far));
                let coarse = gl.integrate(a, b, g);
                let ends = (g(a), g(b));
                // Refine panels where the integrand switches on or off.
                if (ends.0 == 0.0) != (ends.1 == 0.0) {
                    (0..64)
                        .map(|j| {
                            let w = (b - a) / 64.0;
                            gl.integrate(a + j as f64 * w, a + (j + 1) as f64 * w, g)
                        })
                        .sum()
                } else {
                    coarse
                }
            })
            .sum()
    } else {
        let m = (r_far / PANEL).ceil() as i64;
        let cell = PANEL.powi(d as i32);
        let mut total = 0.0;
        let mut idx = vec![-m; d];
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * PANEL).collect();
            total += f(&x, zeta(&x)) * cell;
            let mut a = 0;
            loop {
                if a == d {
                    return total;
                }
                idx[a] += 1;
                if idx[a] < m {
                    break;
                }
                idx[a] = -m;
                a += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VacuumRow {
    pub gamma: f64,
    pub hits: usize,
    pub empirical: f64,
    pub upper95: f64,
    /// ∫_{ζ ≥ γ} e^{−βζ}.
    pub integral: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SoftRow {
    pub gamma: f64,
    /// γ √(log N / β).
    pub threshold: f64,
    pub hits: usize,
    pub empirical: f64,
    pub upper95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TailReport {
    pub rows: Vec<VacuumRow>,
    pub soft: Vec<SoftRow>,
    /// C^{1+β} fitted as the largest empirical/integral ratio.
    pub fitted_prefactor: f64,
    /// The fitted C itself.
    pub fitted_c: f64,
}

/// γ values for the distance form of the vacuum bound.
pub const SOFT_GAMMAS: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

/// P(max_i ζ(x_i) ≥ γ) and P(max_i dist(x_i, Σ) ≥ γ√(log N/β)).
pub fn vacuum_tail(
    samples: &SampleSet,
    eq: &EquilibriumData,
    params: &GasParams,
    gammas: &[f64],
) -> Result<TailReport> {
    check_samples(samples, params.dim().get())?;
    let n = params.n;
    let beta = params.beta;
    let d = params.dim().get();
    let s = params.potential.length_scale();
    let mut max_zeta = Vec::with_capacity(samples.len());
    let mut max_dist = Vec::with_capacity(samples.len());
    for smp in samples.samples() {
        let (mut z, mut dist) = (0.0_f64, 0.0_f64);
        for x in smp.chunks_exact(d) {
            let y = micro_to_macro(params, x);
            let dy = eq.droplet().distance(&y);
            if dy > 0.0 {
                z = z.max(eq.zeta_n(n, x));
                dist = dist.max(dy * s);
            }
        }
        max_zeta.push(z);
        max_dist.push(dist);
    }
    let total = samples.len();
    let rows: Vec<VacuumRow> = gammas
        .iter()
        .map(|&gamma| {
            let hits = max_zeta.iter().filter(|&&z| z >= gamma).count();
            let integral = space_integral(eq, params, |_, z| if z >= gamma { (-beta * z).exp() } else { 0.0 });
            let empirical = hits as f64 / total as f64;
            VacuumRow { gamma, hits, empirical, upper95: upper_95(hits, total), integral, ratio: empirical / integral }
        })
        .collect();
    let scale = ((n as f64).ln() / beta).sqrt();
    let soft = SOFT_GAMMAS
        .iter()
        .map(|&gamma| {
            let threshold = gamma * scale;
            let hits = max_dist.iter().filter(|&&v| v >= threshold).count();
            SoftRow { gamma, threshold, hits, empirical: hits as f64 / total as f64, upper95: upper_95(hits, total) }
        })
        .collect();
    let fitted_prefactor = rows.iter().filter(|r| r.hits > 0 && r.integral > 0.0).map(|r| r.ratio).fold(0.0, f64::max);
    Ok(TailReport { rows, soft, fitted_prefactor, fitted_c: fitted_prefactor.powf(1.0 / (1.0 + beta)) })
}

impl Tabular for TailReport {
    fn csv(&self) -> String {
        let mut out = String::from("gamma,hits,empirical,upper95,integral,ratio\n");
        for r in &self.rows {
            out += &format!("{},{},{},{},{},{}\n", r.gamma, r.hits, r.empirical, r.upper95, r.integral, r.ratio);
        }
        out
    }
}

/// Annulus inner ≤ |x| < outer in microscopic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FarfieldReport {
    pub region: Annulus,
    pub delta: f64,
    /// Per-particle probability of the far-field event.
    pub empirical: f64,
    pub upper95: f64,
    /// ∫_U e^{−β log|y| − βζ(y)} dy in d = 2, ∫_U e^{−βζ} in d = 3.
    pub integral: f64,
    /// C with N^{−1} e^{CβN^{κ}} · integral = empirical (κ = 1 in d = 2, 2/d
    /// otherwise); `None` when nothing was observed.
    pub fitted_c: Option<f64>,
    /// The bound at C = 0: N^{−1} · integral.
    pub bound_at_zero: f64,
}

/// In d = 2 the event is {x_i ∈ U, |x_i| ≥ δ max_{j≠i} |x_j|}; in d = 3 it
/// is {x_i ∈ U}. `delta` defaults to inner/√N.
pub fn farfield_conditional_check(
    samples: &SampleSet,
    eq: &EquilibriumData,
    params: &GasParams,
    region: Annulus,
    delta: Option<f64>,
) -> Result<FarfieldReport> {
    check_samples(samples, params.dim().get())?;
    let n = params.n;
    let d = params.dim().get();
    let s = params.potential.length_scale();
    if !(region.inner < region.outer) {
        return Err(EstimatorError::InvalidArgument("annulus radii out of order".into()));
    }
    if region.inner <= eq.droplet().extent() * s {
        return Err(EstimatorError::Geometry("far-field region must lie outside the droplet".into()));
    }
    let delta = delta.unwrap_or(region.inner / s);
    let two = params.dim().is_two();
    let mut hits = 0usize;
    for smp in samples.samples() {
        let radii: Vec<f64> = smp.chunks_exact(d).map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let (mut first, mut second) = (0.0_f64, 0.0_f64);
        for &r in &radii {
            if r > first {
                second = first;
                first = r;
            } else if r > second {
                second = r;
            }
        }
        for &r in &radii {
            if r < region.inner || r >= region.outer {
                continue;
            }
            let others = if r == first { second } else { first };
            if !two || r >= delta * others {
                hits += 1;
            }
        }
    }
    let trials = samples.len() * n;
    let empirical = hits as f64 / trials as f64;
    let beta = params.beta;
    let integral = space_integral(eq, params, |x, z| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < region.inner || r >= region.outer {
            0.0
        } else if two {
            (-beta * r.ln() - beta * z).exp()
        } else {
            (-beta * z).exp()
        }
    });
    let nf = n as f64;
    let kappa = if two { 1.0 } else { params.dim().two_over_d() };
    let fitted_c = (hits > 0 && integral > 0.0).then(|| (nf * empirical / integral).ln() / (beta * nf.powf(kappa)));
    Ok(FarfieldReport {
        region,
        delta,
        empirical,
        upper95: upper_95(hits, trials),
        integral,
        fitted_c,
        bound_at_zero: integral / nf,
    })
}
