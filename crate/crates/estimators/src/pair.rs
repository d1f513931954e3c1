use coulomb_kernel::{g_of_r, SpaceDim};
use coulomb_sampler::SampleSet;
use serde::{Deserialize, Serialize};

use crate::counts::{check_samples, window_counts};
use crate::error::{EstimatorError, Result};
use crate::stats::{batch_mean, block_jackknife, mean};
use crate::window::Window;
use crate::Tabular;

/// Separation bins [k·width, (k+1)·width), k < count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RadialBins {
    pub width: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairRow {
    pub center: Vec<f64>,
    pub s_lo: f64,
    pub s_hi: f64,
    pub value: f64,
    pub std_error: f64,
}

/// Radially averaged ρ̂₂(x, x + s e) with x ranging over the probe ball
/// B_probe(center).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairCorrelationTable {
    pub probe_radius: f64,
    pub rows: Vec<PairRow>,
}

fn shell_volume(dim: SpaceDim, a: f64, b: f64) -> f64 {
    dim.ball_volume_r(b) - dim.ball_volume_r(a)
}

pub fn estimate_rho2(
    samples: &SampleSet,
    centers: &[Vec<f64>],
    bins: &RadialBins,
    probe_radius: f64,
) -> Result<PairCorrelationTable> {
    let dim = samples.dim();
    let d = dim.get();
    for c in centers {
        check_samples(samples, c.len())?;
    }
    if !(bins.width > 0.0 && bins.count > 0 && probe_radius > 0.0) {
        return Err(EstimatorError::InvalidArgument("bad pair-correlation bins".into()));
    }
    let s_max = bins.width * bins.count as f64;
    let probe_vol = dim.ball_volume_r(probe_radius);
    let mut rows = Vec::new();
    for c in centers {
        // Per-sample pair counts for each separation bin.
        let mut per_sample = vec![vec![0.0; samples.len()]; bins.count];
        for (k, s) in samples.samples().enumerate() {
            let pts: Vec<&[f64]> = s.chunks_exact(d).collect();
            for (i, xi) in pts.iter().enumerate() {
                let r2: f64 = xi.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                if r2 >= probe_radius * probe_radius {
                    continue;
                }
                for (j, xj) in pts.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let sep = xi.iter().zip(*xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    if sep < s_max {
                        per_sample[(sep / bins.width) as usize][k] += 1.0;
                    }
                }
            }
        }
        for (b, counts) in per_sample.iter().enumerate() {
            let (lo, hi) = (b as f64 * bins.width, (b + 1) as f64 * bins.width);
            let norm = probe_vol * shell_volume(dim, lo, hi);
            let (m, se) = batch_mean(counts);
            rows.push(PairRow { center: c.clone(), s_lo: lo, s_hi: hi, value: m / norm, std_error: se / norm });
        }
    }
    Ok(PairCorrelationTable { probe_radius, rows })
}

impl Tabular for PairCorrelationTable {
    fn csv(&self) -> String {
        let mut out = String::from("center,s_lo,s_hi,rho2,std_error\n");
        for r in &self.rows {
            let c: Vec<String> = r.center.iter().map(|v| v.to_string()).collect();
            out += &format!("\"{}\",{},{},{},{}\n", c.join(" "), r.s_lo, r.s_hi, r.value, r.std_error);
        }
        out
    }
}

/// E[C(X(B_s(y)), k)] against the right side of the k-point comparison
/// C^k e^{−β C(k,2)(g(2s) − g(r/2)) + Cβ k r² M} (s/r)^{dk} E[C(X(B_r(y)), k)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BinomialCheck {
    pub center: Vec<f64>,
    pub s: f64,
    pub r: f64,
    pub k: usize,
    pub lhs: f64,
    pub lhs_std_error: f64,
    pub big_moment: f64,
    /// Right side with C = 1.
    pub base_bound: f64,
    /// Smallest C for which the inequality holds at the point estimate.
    pub fitted_c: f64,
}

fn binomial(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (x - j as f64) / (j + 1) as f64).max(0.0)
}

pub fn binomial_moment_check(
    samples: &SampleSet,
    center: &[f64],
    s: f64,
    r: f64,
    k: usize,
    beta: f64,
    laplacian_bound: f64,
) -> Result<BinomialCheck> {
    if !(4.0 * s <= r) || k == 0 {
        return Err(EstimatorError::InvalidArgument("need 4s ≤ r and k ≥ 1".into()));
    }
    let dim = samples.dim();
    let d = dim.get() as f64;
    let small: Vec<f64> =
        window_counts(samples, &Window::ball(center.to_vec(), s))?.into_iter().map(|c| binomial(c as f64, k)).collect();
    let big: Vec<f64> =
        window_counts(samples, &Window::ball(center.to_vec(), r))?.into_iter().map(|c| binomial(c as f64, k)).collect();
    let (lhs, lhs_std_error) = block_jackknife(&small, mean);
    let big_moment = mean(&big);
    let pairs = (k * (k - 1) / 2) as f64;
    let base_bound =
        (-beta * pairs * (g_of_r(2.0 * s, dim) - g_of_r(r / 2.0, dim))).exp() * (s / r).powf(d * k as f64) * big_moment;
    // C^k e^{Cβkr²M} is increasing in C ≥ 0; bisect for the smallest C making it ≥ lhs/base.
    let need = if base_bound > 0.0 { lhs / base_bound } else { f64::INFINITY };
    let factor = |c: f64| c.powi(k as i32) * (c * beta * k as f64 * r * r * laplacian_bound).exp();
    let fitted_c = if need <= 0.0 {
        0.0
    } else if !need.is_finite() {
        f64::INFINITY
    } else {
        let mut hi = 1.0;
        while factor(hi) < need {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if factor(mid) < need {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    Ok(BinomialCheck { center: center.to_vec(), s, r, k, lhs, lhs_std_error, big_moment, base_bound, fitted_c })
}
