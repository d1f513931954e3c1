use coulomb_sampler::SampleSet;
use serde::{Deserialize, Serialize};

use crate::error::{EstimatorError, Result};
use crate::stats::{block_jackknife, mean, variance};
use crate::window::Window;
use crate::Tabular;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MgfValue {
    pub gamma: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CountStatistics {
    pub window: Window,
    pub counts: Vec<usize>,
    pub mean: f64,
    pub variance: f64,
    /// Variance over mean; `None` when the mean is 0.
    pub dispersion: Option<f64>,
    pub mgf: Vec<MgfValue>,
}

pub(crate) fn check_samples(samples: &SampleSet, dim: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(EstimatorError::EmptySamples);
    }
    if samples.dim().get() != dim {
        return Err(EstimatorError::DimensionMismatch { samples: samples.dim().get(), request: dim });
    }
    Ok(())
}

/// Per-sample number of points in `window`.
pub fn window_counts(samples: &SampleSet, window: &Window) -> Result<Vec<usize>> {
    check_samples(samples, window.dim())?;
    let d = samples.dim().get();
    Ok(samples.samples().map(|s| s.chunks_exact(d).filter(|x| window.contains(x)).count()).collect())
}

/// Counts in an arbitrary window with the empirical MGF E[e^{γX}] at each γ.
pub fn count_in_window(samples: &SampleSet, window: Window, gammas: &[f64]) -> Result<CountStatistics> {
    let counts = window_counts(samples, &window)?;
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let m = mean(&xs);
    let v = variance(&xs);
    let mgf = gammas
        .iter()
        .map(|&gamma| {
            let e: Vec<f64> = xs.iter().map(|x| (gamma * x).exp()).collect();
            let (value, std_error) = block_jackknife(&e, mean);
            MgfValue { gamma, value, std_error }
        })
        .collect();
    Ok(CountStatistics { window, counts, mean: m, variance: v, dispersion: (m > 0.0).then(|| v / m), mgf })
}

/// Counts in B_r(center).
pub fn count_in_ball(samples: &SampleSet, center: &[f64], r: f64, gammas: &[f64]) -> Result<CountStatistics> {
    if !(r > 0.0) {
        return Err(EstimatorError::InvalidArgument(format!("radius {r}")));
    }
    count_in_window(samples, Window::ball(center.to_vec(), r), gammas)
}

impl Tabular for CountStatistics {
    fn csv(&self) -> String {
        let mut out = String::from("gamma,mgf,std_error\n");
        for m in &self.mgf {
            out += &format!("{},{},{}\n", m.gamma, m.value, m.std_error);
        }
        out
    }
}
