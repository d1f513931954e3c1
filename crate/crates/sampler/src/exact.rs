//! Exact samplers used as oracles for the chain.

use coulomb_kernel::SpaceDim;
use coulomb_potential::{Domain, PotentialKind};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::chain::unit_vector;
use crate::error::{Result, SamplerError};
use crate::params::GasParams;
use crate::rng;
use crate::sample_set::{SampleHeader, SampleSet, SampleSource, SAMPLE_FORMAT_VERSION};

pub const MAX_EXACT_N: usize = 3;
const ENVELOPE_BINS: usize = 1 << 14;
/// Stream id of the rejection sampler, disjoint from chain ids in practice.
const REJECTION_STREAM: u64 = 0x5245_4a45_4354;

/// Radial law ∝ r^{d−1} e^{−βV_N(r)} (1 + r²)^κ tabulated by bins, each
/// with its mass and an upper bound of the density found by grid search.
struct RadialEnvelope {
    dim: SpaceDim,
    log_q: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    bound: Vec<f64>,
}

impl RadialEnvelope {
    fn new(params: &GasParams, kappa: f64) -> Result<Self> {
        let dim = params.dim();
        let d = dim.get();
        let beta = params.beta;
        let pot = params.potential.clone();
        let v = move |r: f64| {
            let mut x = [0.0; 3];
            x[0] = r;
            pot.eval(&x[..d]).ok()
        };
        let s = params.potential.length_scale();
        let domain = match &params.potential.base().domain {
            Some(Domain::Ball { radius }) => radius * s,
            _ => 1e4 * s,
        };
        let log_q_opt = move |r: f64| -> Option<f64> {
            let vr = v(r)?;
            Some((d as f64 - 1.0) * r.ln() - beta * vr + kappa * (r * r).ln_1p())
        };
        // Outer radius: 50 e-folds below the running maximum, past the peak.
        let dr = 0.01 * s;
        let mut r = dr;
        let mut best = f64::NEG_INFINITY;
        let r_max = loop {
            match log_q_opt(r) {
                Some(l) => {
                    best = best.max(l);
                    if l < best - 50.0 || r >= domain {
                        break r.min(domain);
                    }
                }
                None => break r - dr,
            }
            r += dr;
        };
        if !(r_max > 0.0) {
            return Err(SamplerError::EnvelopeFailure("empty radial range".into()));
        }
        let log_q = move |r: f64| log_q_opt(r).unwrap_or(f64::NEG_INFINITY);
        let edges: Vec<f64> = (0..=ENVELOPE_BINS).map(|k| r_max * k as f64 / ENVELOPE_BINS as f64).collect();
        let gl = coulomb_kernel::GaussLegendre::new(4);
        let shift = best;
        let mut cumulative = Vec::with_capacity(ENVELOPE_BINS);
        let mut bound = Vec::with_capacity(ENVELOPE_BINS);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            acc += gl.integrate(w[0], w[1], |r| (log_q(r) - shift).exp());
            cumulative.push(acc);
            let m = (0..=8).map(|j| (log_q(w[0] + (w[1] - w[0]) * j as f64 / 8.0) - shift).exp()).fold(0.0, f64::max);
            bound.push(1.05 * m);
        }
        let log_q: Box<dyn Fn(f64) -> f64 + Send + Sync> = Box::new(move |r| log_q(r) - shift);
        Ok(RadialEnvelope { dim, log_q, edges, cumulative, bound })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.bound.len() - 1);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        loop {
            let r = a + (b - a) * rng.random::<f64>();
            let q = (self.log_q)(r).exp();
            if q > self.bound[k] {
                return Err(SamplerError::EnvelopeFailure(format!(
                    "density {q} above bin bound {} at r = {r}",
                    self.bound[k]
                )));
            }
            if rng.random::<f64>() * self.bound[k] < q {
                return Ok(unit_vector(self.dim.get(), rng).into_iter().map(|v| v * r).collect());
            }
        }
    }
}

/// Exact i.i.d. samples of the Gibbs measure for N ≤ 3 and a radial potential.
///
/// Proposals are products of the one-particle law ∝ e^{−βV_N(x)}(1 + |x|²)^κ,
/// accepted with the pair factor. In d = 2, κ = β(N−1)/2 and the factor is
/// Π_{i<j} (|x_i − x_j|² / (2(1+|x_i|²)(1+|x_j|²)))^{β/2} ≤ 1; in d = 3,
/// κ = 0 and the factor is e^{−β Σ_{i<j} 1/|x_i − x_j|} ≤ 1.
pub fn rejection_sample_small_n(params: &GasParams, seed: u64, count: usize) -> Result<SampleSet> {
    let n = params.n;
    if n > MAX_EXACT_N {
        return Err(SamplerError::InvalidParams(format!("exact sampling needs N ≤ {MAX_EXACT_N}, got {n}")));
    }
    if !params.potential.base().is_radial() {
        return Err(SamplerError::InvalidParams("exact sampling needs a radial potential".into()));
    }
    if params.beta <= 0.0 {
        return Err(SamplerError::InvalidParams("exact sampling needs β > 0".into()));
    }
    let dim = params.dim();
    let d = dim.get();
    let beta = params.beta;
    let kappa = if dim.is_two() { 0.5 * beta * (n as f64 - 1.0) } else { 0.0 };
    let env = RadialEnvelope::new(params, kappa)?;
    let mut rng = rng::stream(seed, REJECTION_STREAM);
    let mut positions = Vec::with_capacity(count * n * d);
    let mut attempts = 0u64;
    let mut draw = Vec::with_capacity(n * d);
    while positions.len() < count * n * d {
        attempts += 1;
        draw.clear();
        for _ in 0..n {
            draw.extend(env.sample(&mut rng)?);
        }
        let mut log_w = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let (xi, xj) = (&draw[i * d..(i + 1) * d], &draw[j * d..(j + 1) * d]);
                let r2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                log_w += if dim.is_two() {
                    let ni: f64 = xi.iter().map(|v| v * v).sum();
                    let nj: f64 = xj.iter().map(|v| v * v).sum();
                    0.5 * beta * (r2 / (2.0 * (1.0 + ni) * (1.0 + nj))).ln()
                } else {
                    -beta / r2.sqrt()
                };
            }
        }
        if log_w > 1e-12 {
            return Err(SamplerError::EnvelopeFailure(format!("pair factor e^{log_w} exceeds 1")));
        }
        if rng.random::<f64>().ln() < log_w {
            positions.extend_from_slice(&draw);
        }
    }
    let header = SampleHeader {
        version: SAMPLE_FORMAT_VERSION,
        source: SampleSource::Rejection,
        params_digest: params.digest(),
        seed,
        n,
        dim,
        beta,
        schedule: None,
        acceptance: count as f64 / attempts as f64,
        autocorrelation: 1.0,
        chains: Vec::new(),
    };
    SampleSet::new(header, positions)
}

/// Exact samples for d = 2, V₁ = |x|²/2, β = 2 (the Ginibre ensemble): the
/// squared moduli are independent Gamma(k, 1), k = 1..N, with uniform phases.
pub fn exact_ginibre(params: &GasParams, seed: u64, count: usize) -> Result<SampleSet> {
    let is_ginibre = params.dim().is_two()
        && params.beta == 2.0
        && matches!(params.potential.base().kind, PotentialKind::Quadratic { coefficient } if coefficient == 0.5);
    if !is_ginibre {
        return Err(SamplerError::InvalidParams("exact Ginibre sampling needs d = 2, V₁ = |x|²/2, β = 2".into()));
    }
    let n = params.n;
    let gammas: Vec<Gamma<f64>> = (1..=n).map(|k| Gamma::new(k as f64, 1.0).expect("positive shape")).collect();
    let mut positions = Vec::with_capacity(count * n * 2);
    for s in 0..count {
        let mut rng = rng::stream(seed, s as u64);
        let mut pts: Vec<[f64; 2]> = gammas
            .iter()
            .map(|g| {
                let r = g.sample(&mut rng).sqrt();
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                [r * phi.cos(), r * phi.sin()]
            })
            .collect();
        pts.shuffle(&mut rng);
        positions.extend(pts.iter().flatten());
    }
    let header = SampleHeader {
        version: SAMPLE_FORMAT_VERSION,
        source: SampleSource::ExactGinibre,
        params_digest: params.digest(),
        seed,
        n,
        dim: params.dim(),
        beta: params.beta,
        schedule: None,
        acceptance: 1.0,
        autocorrelation: 1.0,
        chains: Vec::new(),
    };
    SampleSet::new(header, positions)
}

/// `count` samples of N i.i.d. uniform points in the ball of the given
/// radius: a binomial stand-in for a Poisson process in synthetic controls.
pub fn uniform_ball_samples(dim: SpaceDim, n: usize, radius: f64, count: usize, seed: u64) -> Result<SampleSet> {
    let d = dim.get();
    let mut rng = rng::stream(seed, 0);
    let mut positions = Vec::with_capacity(count * n * d);
    for _ in 0..count * n {
        let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
        positions.extend(unit_vector(d, &mut rng).into_iter().map(|v| v * r));
    }
    let header = SampleHeader {
        version: SAMPLE_FORMAT_VERSION,
        source: SampleSource::Synthetic,
        params_digest: String::new(),
        seed,
        n,
        dim,
        beta: 0.0,
        schedule: None,
        acceptance: 1.0,
        autocorrelation: 1.0,
        chains: Vec::new(),
    };
    SampleSet::new(header, positions)
}
