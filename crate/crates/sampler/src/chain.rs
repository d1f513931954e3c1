use std::collections::VecDeque;

use coulomb_kernel::{interaction_delta, total_energy, Configuration, DiscreteMeasure, MeasureSupport};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, SamplerError};
use crate::params::GasParams;
use crate::rng;
use crate::sample_set::{ChainSchedule, ChainSummary, SampleHeader, SampleSet, SampleSource};
use crate::stats::integrated_autocorrelation;

pub const INITIAL_STEP_SCALE: f64 = 0.5;
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.23, 0.5);
/// Sweeps between recomputations of the cached energy.
pub const RECHECK_SWEEPS: u64 = 16;
pub const ENERGY_TRACE_CAPACITY: usize = 4096;
const ADAPT_WINDOW_SWEEPS: u64 = 10;
const MAX_INIT_TRIES: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainStats {
    pub proposed: u64,
    pub accepted: u64,
    /// Energy after each sweep, most recent last.
    pub energy_trace: VecDeque<f64>,
}

impl ChainStats {
    pub fn acceptance(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn push_energy(&mut self, e: f64) {
        if self.energy_trace.len() == ENERGY_TRACE_CAPACITY {
            self.energy_trace.pop_front();
        }
        self.energy_trace.push_back(e);
    }
}

#[derive(Debug, Clone)]
pub struct ChainState {
    positions: Vec<f64>,
    energy: f64,
    seed: u64,
    chain: u64,
    step: u64,
    pub step_scale: f64,
    frozen: bool,
    pub stats: ChainStats,
    rng: ChaCha8Rng,
}

impl ChainState {
    /// A chain started from explicit positions.
    pub fn from_configuration(params: &GasParams, config: &Configuration, seed: u64, chain: u64) -> Result<Self> {
        if config.len() != params.n || config.dim() != params.dim() {
            return Err(SamplerError::InvalidParams("configuration does not match the gas".into()));
        }
        let energy = total_energy(config, &params.potential)?;
        Ok(ChainState {
            positions: config.as_flat().to_vec(),
            energy,
            seed,
            chain,
            step: 0,
            step_scale: INITIAL_STEP_SCALE,
            frozen: false,
            stats: ChainStats::default(),
            rng: rng::stream(seed, chain),
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn configuration(&self, params: &GasParams) -> Configuration {
        Configuration::from_flat(params.dim(), self.positions.clone()).expect("finite positions")
    }

    /// Cached H.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn chain(&self) -> u64 {
        self.chain
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Stops step-size adaptation.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Recomputes H and fails if the cached value drifted by more than 1e−8(1 + |H|).
    pub fn recheck_energy(&mut self, params: &GasParams) -> Result<()> {
        let recomputed = total_energy(&self.configuration(params), &params.potential)?;
        if (recomputed - self.energy).abs() > 1e-8 * (1.0 + recomputed.abs()) {
            return Err(SamplerError::EnergyDrift { cached: self.energy, recomputed });
        }
        self.energy = recomputed;
        Ok(())
    }
}

/// Draws a point from a piecewise-constant measure.
pub fn sample_measure(mu: &DiscreteMeasure, rng: &mut impl Rng) -> Vec<f64> {
    let d = mu.dim().get();
    match mu.support() {
        MeasureSupport::Radial(p) => {
            let k = pick(rng, (0..p.shells()).map(|k| p.shell_mass(k)));
            let (a, b) = (p.edges()[k], p.edges()[k + 1]);
            let u: f64 = rng.random();
            let r = (a.powi(d as i32) + u * (b.powi(d as i32) - a.powi(d as i32))).powf(1.0 / d as f64);
            unit_vector(d, rng).into_iter().map(|v| v * r).collect()
        }
        MeasureSupport::Cartesian(c) => {
            let grid = c.grid();
            let k = pick(rng, c.densities().iter().copied());
            let idx = grid.unflatten(k);
            (0..d).map(|a| grid.lower[a] + (idx[a] as f64 + rng.random::<f64>()) * grid.spacing).collect()
        }
    }
}

fn pick(rng: &mut impl Rng, weights: impl Iterator<Item = f64>) -> usize {
    let cum: Vec<f64> = weights
        .scan(0.0, |s, w| {
            *s += w.max(0.0);
            Some(*s)
        })
        .collect();
    let u = rng.random::<f64>() * cum.last().copied().unwrap_or(0.0);
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

pub(crate) fn unit_vector(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Initial state for chain `chain`: i.i.d. draws from μ_θ,N when thermal
/// data is attached, otherwise uniform on the box of half-width N^{1/d}
/// times the droplet extent (1 without equilibrium data).
pub fn init_configuration(params: &GasParams, seed: u64, chain: u64) -> Result<ChainState> {
    let mut rng = rng::init_stream(seed, chain);
    let d = params.dim().get();
    let s = params.potential.length_scale();
    let half = s * params.equilibrium.as_ref().map_or(1.0, |e| e.droplet().extent());
    let mut flat = Vec::with_capacity(params.n * d);
    for i in 0..params.n {
        let mut placed = false;
        for _ in 0..MAX_INIT_TRIES {
            let x: Vec<f64> = match &params.thermal {
                Some(t) => sample_measure(t.mu_theta1(), &mut rng).into_iter().map(|v| v * s).collect(),
                None => (0..d).map(|_| half * (2.0 * rng.random::<f64>() - 1.0)).collect(),
            };
            if params.v(&x).is_some() {
                flat.extend_from_slice(&x);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SamplerError::Initialization(i));
        }
    }
    let config = Configuration::from_flat(params.dim(), flat)?;
    ChainState::from_configuration(params, &config, seed, chain)
}

/// Gaussian proposal density q(a → b) for a single moved particle.
pub fn proposal_density(from: &[f64], to: &[f64], scale: f64) -> f64 {
    let d = from.len() as f64;
    let r2: f64 = from.iter().zip(to).map(|(a, b)| (a - b) * (a - b)).sum();
    (-0.5 * r2 / (scale * scale)).exp() / (std::f64::consts::TAU * scale * scale).powf(0.5 * d)
}

/// Metropolis acceptance probability of moving particle `i` to `new`;
/// zero outside the potential's domain.
pub fn acceptance_probability(params: &GasParams, positions: &[f64], i: usize, new: &[f64]) -> Result<f64> {
    Ok(match delta_energy(params, positions, i, new)? {
        Some(de) => (-params.beta * de).exp().min(1.0),
        None => 0.0,
    })
}

fn delta_energy(params: &GasParams, positions: &[f64], i: usize, new: &[f64]) -> Result<Option<f64>> {
    let d = params.dim().get();
    let old = &positions[i * d..(i + 1) * d];
    let Some(v_new) = params.v(new) else { return Ok(None) };
    let v_old = params.v(old).ok_or_else(|| SamplerError::InvalidParams("particle outside domain".into()))?;
    Ok(Some(interaction_delta(positions, params.dim(), i, new)? + v_new - v_old))
}

/// One single-particle Metropolis step. Returns whether the move was accepted.
pub fn mh_step(state: &mut ChainState, params: &GasParams) -> Result<bool> {
    let d = params.dim().get();
    rng::seek_step(&mut state.rng, state.step);
    state.step += 1;
    state.stats.proposed += 1;
    let i = state.rng.random_range(0..params.n);
    let mut new = [0.0; 3];
    for (a, slot) in new.iter_mut().enumerate().take(d) {
        let z: f64 = state.rng.sample(StandardNormal);
        *slot = state.positions[i * d + a] + state.step_scale * z;
    }
    let new = &new[..d];
    let u: f64 = state.rng.random();
    let Some(de) = delta_energy(params, &state.positions, i, new)? else {
        return Ok(false);
    };
    let accept = de <= 0.0 || u < (-params.beta * de).exp();
    if accept {
        state.positions[i * d..(i + 1) * d].copy_from_slice(new);
        state.energy += de;
        state.stats.accepted += 1;
    }
    Ok(accept)
}

/// N single-particle steps.
pub fn sweep(state: &mut ChainState, params: &GasParams) -> Result<()> {
    for _ in 0..params.n {
        mh_step(state, params)?;
    }
    let sweeps = state.step / params.n as u64;
    state.stats.push_energy(state.energy);
    if sweeps.is_multiple_of(RECHECK_SWEEPS) {
        state.recheck_energy(params)?;
    }
    Ok(())
}

/// Burn-in with step-size adaptation toward TARGET_ACCEPTANCE, then frozen
/// sampling every `thin_sweeps` sweeps.
pub fn run_chain(state: &mut ChainState, params: &GasParams, schedule: &ChainSchedule) -> Result<SampleSet> {
    if schedule.samples == 0 || schedule.thin_sweeps == 0 {
        return Err(SamplerError::InvalidParams("schedule must be positive".into()));
    }
    let mut window = (state.stats.proposed, state.stats.accepted);
    for s in 1..=schedule.burn_in_sweeps as u64 {
        sweep(state, params)?;
        if !state.frozen && s % ADAPT_WINDOW_SWEEPS == 0 {
            let p = state.stats.proposed - window.0;
            let a = state.stats.accepted - window.1;
            let rate = a as f64 / p.max(1) as f64;
            if rate < TARGET_ACCEPTANCE.0 {
                state.step_scale *= 0.8;
            } else if rate > TARGET_ACCEPTANCE.1 {
                state.step_scale = (state.step_scale * 1.25).min(1e3);
            }
            window = (state.stats.proposed, state.stats.accepted);
        }
    }
    state.freeze();
    let before = (state.stats.proposed, state.stats.accepted);
    let mut positions = Vec::with_capacity(schedule.samples * state.positions.len());
    let mut energies = Vec::with_capacity(schedule.samples);
    for _ in 0..schedule.samples {
        for _ in 0..schedule.thin_sweeps {
            sweep(state, params)?;
        }
        positions.extend_from_slice(&state.positions);
        energies.push(state.energy);
    }
    let acceptance = (state.stats.accepted - before.1) as f64 / (state.stats.proposed - before.0).max(1) as f64;
    let tau = integrated_autocorrelation(&energies);
    let header = SampleHeader {
        version: crate::sample_set::SAMPLE_FORMAT_VERSION,
        source: SampleSource::Mcmc,
        params_digest: params.digest(),
        seed: state.seed,
        n: params.n,
        dim: params.dim(),
        beta: params.beta,
        schedule: Some(*schedule),
        acceptance,
        autocorrelation: tau,
        chains: vec![ChainSummary {
            chain: state.chain,
            samples: schedule.samples,
            acceptance,
            autocorrelation: tau,
            step_scale: state.step_scale,
        }],
    };
    SampleSet::new(header, positions)
}

/// Independent chains 0..chains, run on `threads` workers (all cores when
/// `None`). Output does not depend on the thread count.
pub fn run_chains(
    params: &GasParams,
    seed: u64,
    schedule: &ChainSchedule,
    chains: usize,
    threads: Option<usize>,
) -> Result<SampleSet> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| SamplerError::InvalidParams(e.to_string()))?;
    let sets: Vec<Result<SampleSet>> = pool.install(|| {
        (0..chains as u64)
            .into_par_iter()
            .map(|c| {
                let mut st = init_configuration(params, seed, c)?;
                run_chain(&mut st, params, schedule)
            })
            .collect()
    });
    SampleSet::merge(sets.into_iter().collect::<Result<Vec<_>>>()?)
}
