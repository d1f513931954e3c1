//! Error bars for correlated sample sequences.

/// Number of contiguous blocks used for batch means and the block jackknife.
pub const BLOCKS: usize = 20;

/// Mean and batch-means standard error over `min(BLOCKS, len)` blocks.
pub fn batch_mean(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let b = BLOCKS.min(n);
    if b < 2 {
        return (mean, f64::NAN);
    }
    let means: Vec<f64> =
        block_ranges(n, b).map(|(lo, hi)| xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64).collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    (mean, (var / b as f64).sqrt())
}

/// Block jackknife of `stat` with `min(BLOCKS, len)` contiguous blocks.
/// Returns the full-sample estimate and the jackknife standard error.
pub fn block_jackknife(xs: &[f64], stat: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let n = xs.len();
    let full = stat(xs);
    let b = BLOCKS.min(n);
    if b < 2 {
        return (full, f64::NAN);
    }
    let mut scratch = Vec::with_capacity(n);
    let leave_out: Vec<f64> = block_ranges(n, b)
        .map(|(lo, hi)| {
            scratch.clear();
            scratch.extend_from_slice(&xs[..lo]);
            scratch.extend_from_slice(&xs[hi..]);
            stat(&scratch)
        })
        .collect();
    let m = leave_out.iter().sum::<f64>() / b as f64;
    let var = (b as f64 - 1.0) / b as f64 * leave_out.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    (full, var.sqrt())
}

pub(crate) fn block_ranges(n: usize, b: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..b).map(move |k| (k * n / b, (k + 1) * n / b))
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0).max(1.0)
}

/// Sample quantile by linear interpolation of the order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One-sided 95% upper bound for a binomial proportion: exact (Clopper–Pearson
/// style) when nothing was observed, normal approximation otherwise.
pub fn upper_95(hits: usize, trials: usize) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    if hits == 0 {
        return 1.0 - 0.05f64.powf(1.0 / n);
    }
    let p = hits as f64 / n;
    (p + 1.645 * (p * (1.0 - p) / n).sqrt()).min(1.0)
}
