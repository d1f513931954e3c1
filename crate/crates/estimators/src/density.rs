use coulomb_kernel::{CartesianGrid, SpaceDim};
use coulomb_sampler::SampleSet;
use serde::{Deserialize, Serialize};

use crate::counts::check_samples;
use crate::error::{EstimatorError, Result};
use crate::stats::{block_ranges, BLOCKS};
use crate::Tabular;

/// Default histogram bin side in microscopic units.
pub const DEFAULT_BIN: f64 = 0.5;
/// Fraction of points outside the grid above which a warning is logged.
pub const LEAKAGE_WARNING: f64 = 0.01;

/// Cubic bins of side `spacing` covering [−half_width, half_width]^d, with
/// an odd count per axis so that the origin is a bin centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BinSpec {
    pub spacing: f64,
    pub half_width: f64,
}

impl BinSpec {
    pub fn new(spacing: f64, half_width: f64) -> Self {
        BinSpec { spacing, half_width }
    }

    pub fn grid(&self, dim: SpaceDim) -> Result<CartesianGrid> {
        if !(self.spacing > 0.0 && self.half_width > 0.0) {
            return Err(EstimatorError::InvalidArgument("bin spacing and extent must be positive".into()));
        }
        let m = (self.half_width / self.spacing - 0.5).ceil().max(0.0) as usize;
        let d = dim.get();
        Ok(CartesianGrid::new(vec![-(m as f64 + 0.5) * self.spacing; d], self.spacing, vec![2 * m + 1; d])?)
    }
}

/// Histogram estimate of ρ₁ with batch-means standard errors per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityEstimate {
    pub grid: CartesianGrid,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Σ ρ̂₁ h^d.
    pub integral: f64,
    /// Fraction of points that fell outside the grid.
    pub leakage: f64,
    pub samples: usize,
}

pub fn estimate_rho1(samples: &SampleSet, bins: &BinSpec) -> Result<DensityEstimate> {
    check_samples(samples, samples.dim().get())?;
    let grid = bins.grid(samples.dim())?;
    let d = grid.dim();
    let len = grid.len();
    let s = samples.len();
    let b = BLOCKS.min(s);
    let mut per_block = vec![vec![0u32; len]; b];
    let mut outside = 0usize;
    for (block, (lo, hi)) in block_ranges(s, b).enumerate() {
        for k in lo..hi {
            for x in samples.sample(k).chunks_exact(d) {
                match grid.locate_cell(x) {
                    Some(c) => per_block[block][c] += 1,
                    None => outside += 1,
                }
            }
        }
    }
    let vol = grid.cell_volume();
    let sizes: Vec<f64> = block_ranges(s, b).map(|(lo, hi)| (hi - lo) as f64).collect();
    let mut values = vec![0.0; len];
    let mut std_errors = vec![0.0; len];
    for c in 0..len {
        let total: u32 = per_block.iter().map(|bl| bl[c]).sum();
        values[c] = total as f64 / (s as f64 * vol);
        if b >= 2 {
            let means: Vec<f64> = per_block.iter().zip(&sizes).map(|(bl, n)| bl[c] as f64 / (n * vol)).collect();
            let m = means.iter().sum::<f64>() / b as f64;
            let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b as f64 - 1.0);
            std_errors[c] = (var / b as f64).sqrt();
        } else {
            std_errors[c] = f64::NAN;
        }
    }
    let integral = values.iter().sum::<f64>() * vol;
    let leakage = outside as f64 / (s * samples.n()) as f64;
    if leakage > LEAKAGE_WARNING {
        log::warn!("{:.2}% of points fall outside the ρ₁ grid", 100.0 * leakage);
    }
    Ok(DensityEstimate { grid, values, std_errors, integral, leakage, samples: s })
}

impl DensityEstimate {
    /// A noiseless estimate holding the bin-centre values of `f`.
    pub fn from_field(grid: CartesianGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|k| f(&grid.cell_center(k))).collect();
        let integral = values.iter().sum::<f64>() * grid.cell_volume();
        let std_errors = vec![0.0; values.len()];
        DensityEstimate { grid, values, std_errors, integral, leakage: 0.0, samples: 0 }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Multilinear interpolation weights over bin centres; `None` outside
    /// the hull of the centres.
    pub fn interpolation_weights(&self, x: &[f64]) -> Option<Vec<(usize, f64)>> {
        let d = self.dim();
        let h = self.grid.spacing;
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for ((xa, lower), &shape) in x.iter().zip(&self.grid.lower).zip(&self.grid.shape).take(d) {
            let t = (xa - lower) / h - 0.5;
            let i = t.floor();
            if i < 0.0 || i as usize + 1 >= shape {
                return None;
            }
            base.push(i as usize);
            frac.push(t - i);
        }
        let mut out = Vec::with_capacity(1 << d);
        for corner in 0..(1usize << d) {
            let mut idx = vec![0; d];
            let mut w = 1.0;
            for a in 0..d {
                let up = (corner >> a) & 1 == 1;
                idx[a] = base[a] + up as usize;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
            }
            out.push((self.grid.flatten(&idx), w));
        }
        Some(out)
    }

    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        self.interpolation_weights(x).map(|ws| ws.iter().map(|(k, w)| w * self.values[*k]).sum())
    }

    /// ∫_{B_r(center)} ρ̂₁, with each bin's overlap found on an 8^d sub-lattice.
    pub fn ball_integral(&self, center: &[f64], r: f64) -> f64 {
        let d = self.dim();
        let h = self.grid.spacing;
        let sub = 8usize;
        let subs = sub.pow(d as u32);
        let mut total = 0.0;
        for k in 0..self.grid.len() {
            if self.values[k] == 0.0 {
                continue;
            }
            let c = self.grid.cell_center(k);
            let dc: f64 = c.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let half_diag = 0.5 * h * (d as f64).sqrt();
            let frac = if dc + half_diag <= r {
                1.0
            } else if dc - half_diag >= r {
                0.0
            } else {
                let inside = (0..subs)
                    .filter(|&j| {
                        let mut r2 = 0.0;
                        let mut jj = j;
                        for a in 0..d {
                            let t = (jj % sub) as f64;
                            jj /= sub;
                            let p = c[a] - 0.5 * h + (t + 0.5) * h / sub as f64;
                            r2 += (p - center[a]).powi(2);
                        }
                        r2 < r * r
                    })
                    .count();
                inside as f64 / subs as f64
            };
            total += frac * self.values[k];
        }
        total * self.grid.cell_volume()
    }

    /// Largest value over bins whose centre satisfies `pred`.
    pub fn max_where(&self, pred: impl Fn(&[f64]) -> bool) -> f64 {
        (0..self.grid.len()).filter(|&k| pred(&self.grid.cell_center(k))).map(|k| self.values[k]).fold(0.0, f64::max)
    }
}

impl Tabular for DensityEstimate {
    fn csv(&self) -> String {
        let d = self.dim();
        let mut out = (0..d).map(|a| format!("x{a},")).collect::<String>() + "rho1,std_error\n";
        for k in 0..self.grid.len() {
            for v in self.grid.cell_center(k) {
                out += &format!("{v},");
            }
            out += &format!("{},{}\n", self.values[k], self.std_errors[k]);
        }
        out
    }
}
