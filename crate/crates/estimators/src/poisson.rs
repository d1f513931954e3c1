use coulomb_equilibrium::EquilibriumData;
use coulomb_sampler::{GasParams, SampleSet};
use serde::{Deserialize, Serialize};

use crate::counts::window_counts;
use crate::error::{EstimatorError, Result};
use crate::stats::{block_jackknife, mean, variance};
use crate::window::Window;
use crate::Tabular;

/// Label carried by every report: these are finite-N diagnostics.
pub const EVIDENCE_LABEL: &str = "finite-N evidence";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowPoisson {
    pub window: Window,
    pub mean: f64,
    pub variance: f64,
    pub dispersion: f64,
    pub dispersion_std_error: f64,
    /// Total variation between the count histogram and Poisson(mean).
    pub tv_distance: f64,
    /// mean / |W|.
    pub rho1: f64,
    /// E[X(X−1)] / |W|².
    pub rho2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoissonReport {
    pub label: String,
    pub windows: Vec<WindowPoisson>,
    /// max/min of ρ̂₁ across windows.
    pub rho1_flatness: f64,
    /// max/min of ρ̂₂ across windows.
    pub rho2_flatness: f64,
    /// Some window mean sits more than 3 SE from the pooled mean, which
    /// points at a mixture rather than a single Poisson law.
    pub heterogeneous: bool,
}

fn poisson_tv(counts: &[usize], lambda: f64) -> f64 {
    let kmax = counts.iter().copied().max().unwrap_or(0);
    let total = counts.len() as f64;
    let mut hist = vec![0.0; kmax + 1];
    for &c in counts {
        hist[c] += 1.0 / total;
    }
    let mut q = (-lambda).exp();
    let mut covered = 0.0;
    let mut diff = 0.0;
    for (k, p) in hist.iter().enumerate() {
        if k > 0 {
            q *= lambda / k as f64;
        }
        covered += q;
        diff += (p - q).abs();
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}

/// Dispersion, TV to the fitted Poisson law and intensity flatness per window.
pub fn poisson_tests(samples: &SampleSet, windows: &[Window]) -> Result<PoissonReport> {
    if windows.is_empty() {
        return Err(EstimatorError::InvalidArgument("no windows".into()));
    }
    let mut rows = Vec::with_capacity(windows.len());
    let mut mean_se = Vec::with_capacity(windows.len());
    for w in windows {
        let counts = window_counts(samples, w)?;
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let m = mean(&xs);
        let v = variance(&xs);
        let (dispersion, dispersion_std_error) = block_jackknife(&xs, |s| variance(s) / mean(s));
        let (_, se) = block_jackknife(&xs, mean);
        mean_se.push(se);
        let vol = w.volume();
        let factorial2 = xs.iter().map(|x| x * (x - 1.0)).sum::<f64>() / xs.len() as f64;
        rows.push(WindowPoisson {
            window: w.clone(),
            mean: m,
            variance: v,
            dispersion,
            dispersion_std_error,
            tv_distance: poisson_tv(&counts, m),
            rho1: m / vol,
            rho2: factorial2 / (vol * vol),
        });
    }
    let flat = |f: &dyn Fn(&WindowPoisson) -> f64| {
        let (lo, hi) = rows.iter().map(f).fold((f64::INFINITY, 0.0_f64), |(a, b), v| (a.min(v), b.max(v)));
        hi / lo
    };
    let rho1_flatness = flat(&|r| r.rho1);
    let rho2_flatness = flat(&|r| r.rho2);
    let pooled = rows.iter().map(|r| r.rho1).sum::<f64>() / rows.len() as f64;
    let heterogeneous = rows.iter().zip(&mean_se).any(|(r, se)| (r.mean - pooled * r.window.volume()).abs() > 3.0 * se);
    Ok(PoissonReport { label: EVIDENCE_LABEL.into(), windows: rows, rho1_flatness, rho2_flatness, heterogeneous })
}

/// Rejects windows closer to the droplet edge than two window diameters, then
/// runs `poisson_tests`.
pub fn poisson_tests_in_bulk(
    samples: &SampleSet,
    eq: &EquilibriumData,
    params: &GasParams,
    windows: &[Window],
) -> Result<PoissonReport> {
    let s = params.potential.length_scale();
    for w in windows {
        let c = w.center();
        let inside = eq.in_droplet_n(params.n, &c);
        // The window itself reaches half a diameter out from its centre.
        let margin = edge_distance(eq, params.n, &c, s);
        if !inside || margin < 2.5 * w.diameter() {
            return Err(EstimatorError::Geometry(format!("window at {c:?} is not in the bulk")));
        }
    }
    poisson_tests(samples, windows)
}

fn edge_distance(eq: &EquilibriumData, n: usize, c: &[f64], s: f64) -> f64 {
    let d = c.len();
    let dirs: Vec<Vec<f64>> = if d == 2 {
        (0..64)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 64.0;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        coulomb_kernel::unit_sphere_rule(eq.dim(), 128).into_iter().map(|(p, _)| p).collect()
    };
    let step = 0.05;
    let limit = 2.0 * (eq.droplet().extent() * s + 1.0);
    dirs.iter()
        .map(|u| {
            let mut t = 0.0;
            while t < limit {
                let x: Vec<f64> = c.iter().zip(u).map(|(a, b)| a + t * b).collect();
                if !eq.in_droplet_n(n, &x) {
                    break;
                }
                t += step;
            }
            t
        })
        .fold(f64::INFINITY, f64::min)
}

impl Tabular for PoissonReport {
    fn csv(&self) -> String {
        let mut out = String::from("center,mean,variance,dispersion,dispersion_se,tv,rho1,rho2\n");
        for r in &self.windows {
            let c: Vec<String> = r.window.center().iter().map(|v| v.to_string()).collect();
            out += &format!(
                "{},{},{},{},{},{},{},{}\n",
                c.join(" "),
                r.mean,
                r.variance,
                r.dispersion,
                r.dispersion_std_error,
                r.tv_distance,
                r.rho1,
                r.rho2
            );
        }
        out
    }
}
