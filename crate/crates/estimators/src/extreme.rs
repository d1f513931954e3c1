use coulomb_sampler::SampleSet;
use serde::{Deserialize, Serialize};

use crate::counts::check_samples;
use crate::error::Result;
use crate::stats::{batch_mean, quantile, upper_95};
use crate::Tabular;

/// Step in t along the exceedance curve.
pub const CURVE_STEP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExceedanceRow {
    pub t: f64,
    /// √N + √((log N − log log N + 2t)/(2β)).
    pub radius: f64,
    pub hits: usize,
    pub empirical: f64,
    pub std_error: f64,
    pub upper95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtremeReport {
    pub n: usize,
    pub beta: f64,
    /// max_i |x_i| per sample.
    pub maxima: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// (q, value) at q = 0.05, 0.25, 0.5, 0.75, 0.95.
    pub quantiles: Vec<(f64, f64)>,
    pub curve: Vec<ExceedanceRow>,
    /// Smallest C with P ≤ C e^{−t} on t ≤ log N / 2.
    pub fitted_c: f64,
    /// Whether the whole curve stays below C e^{−t} + 3 SE.
    pub curve_below_bound: bool,
}

/// √N + ½√(log N − 2 log log N − log 2π). NaN while the radicand is negative.
pub fn rider_center(n: usize) -> f64 {
    let nf = n as f64;
    let l = nf.ln();
    nf.sqrt() + 0.5 * (l - 2.0 * l.ln() - (2.0 * std::f64::consts::PI).ln()).sqrt()
}

/// Per-sample maximal radius with summary statistics and the exceedance
/// curve P(max ≥ √N + √((log N − log log N + 2t)/(2β))) for t ∈ [0, log N].
pub fn extreme_radius(samples: &SampleSet) -> Result<ExtremeReport> {
    let d = samples.dim().get();
    check_samples(samples, d)?;
    let n = samples.n();
    let beta = samples.header.beta;
    let maxima: Vec<f64> = samples
        .samples()
        .map(|s| s.chunks_exact(d).map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max))
        .collect();
    let (mean, std_error) = batch_mean(&maxima);
    let mut sorted = maxima.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = [0.05, 0.25, 0.5, 0.75, 0.95].iter().map(|&q| (q, quantile(&sorted, q))).collect();

    let nf = n as f64;
    let l = nf.ln();
    let ll = if n > 1 { l.ln() } else { f64::NEG_INFINITY };
    let steps = (l / CURVE_STEP).floor() as usize;
    let total = maxima.len();
    let curve: Vec<ExceedanceRow> = (0..=steps)
        .filter_map(|k| {
            let t = k as f64 * CURVE_STEP;
            let arg = (l - ll + 2.0 * t) / (2.0 * beta);
            if !(arg >= 0.0) || !arg.is_finite() {
                return None;
            }
            let radius = nf.sqrt() + arg.sqrt();
            let ind: Vec<f64> = maxima.iter().map(|&m| if m >= radius { 1.0 } else { 0.0 }).collect();
            let hits = ind.iter().filter(|&&v| v > 0.0).count();
            let (empirical, se) = batch_mean(&ind);
            Some(ExceedanceRow { t, radius, hits, empirical, std_error: se, upper95: upper_95(hits, total) })
        })
        .collect();
    let fitted_c = curve.iter().filter(|r| r.t <= 0.5 * l).map(|r| r.empirical * r.t.exp()).fold(0.0, f64::max);
    let curve_below_bound = curve.iter().all(|r| r.empirical <= fitted_c * (-r.t).exp() + 3.0 * r.std_error.max(0.0));
    Ok(ExtremeReport { n, beta, maxima, mean, std_error, quantiles, curve, fitted_c, curve_below_bound })
}

impl Tabular for ExtremeReport {
    fn csv(&self) -> String {
        let mut out = String::from("t,radius,hits,empirical,std_error,upper95,bound\n");
        for r in &self.curve {
            out += &format!(
                "{},{},{},{},{},{},{}\n",
                r.t,
                r.radius,
                r.hits,
                r.empirical,
                r.std_error,
                r.upper95,
                self.fitted_c * (-r.t).exp()
            );
        }
        out
    }
}
