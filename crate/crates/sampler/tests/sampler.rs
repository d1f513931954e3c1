use std::sync::Arc;

use approx::assert_abs_diff_eq;
use coulomb_equilibrium::{solve_equilibrium, solve_thermal_equilibrium, GridSpec};
use coulomb_kernel::{total_energy, Configuration, SpaceDim};
use coulomb_potential::PotentialSpec;
use coulomb_sampler::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quad_params(dim: SpaceDim, n: usize, beta: f64) -> GasParams {
    GasParams::new(PotentialSpec::quadratic(0.5).unwrap(), dim, n, beta).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn ks_one(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(sample.to_vec());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a.to_vec()), sorted(b.to_vec()));
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn radii(set: &SampleSet) -> Vec<f64> {
    set.points().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

/// Mean and batch-means standard error.
fn batch_mean(xs: &[f64], batches: usize) -> (f64, f64) {
    let m = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(m).map(|c| c.iter().sum::<f64>() / m as f64).collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}

#[test]
fn init_is_deterministic_and_uses_thermal_measure() {
    let q = PotentialSpec::quadratic(0.5).unwrap();
    let n = 100;
    let beta = 0.5;
    let t = solve_thermal_equilibrium(&q, SpaceDim::TWO, beta * n as f64, &GridSpec::Auto).unwrap();
    let eq = solve_equilibrium(&q, SpaceDim::TWO, &GridSpec::Auto).unwrap();
    let p =
        quad_params(SpaceDim::TWO, n, beta).with_equilibrium(Arc::new(eq)).unwrap().with_thermal(Arc::new(t)).unwrap();
    let a = init_configuration(&p, 7, 0).unwrap();
    let b = init_configuration(&p, 7, 0).unwrap();
    assert_eq!(a.positions(), b.positions());
    assert_ne!(a.positions(), init_configuration(&p, 7, 1).unwrap().positions());
    let inside = a
        .positions()
        .chunks(2)
        .filter(|x| p.equilibrium.as_ref().unwrap().in_droplet_n(n, &[x[0] / 2.0, x[1] / 2.0]))
        .count();
    assert!(inside >= 95, "{inside} of 100 within the dilated droplet");

    let p1 = quad_params(SpaceDim::TWO, 1, 50.0);
    let t1 = solve_thermal_equilibrium(&PotentialSpec::quadratic(0.5).unwrap(), SpaceDim::TWO, 50.0, &GridSpec::Auto)
        .unwrap();
    let p1 = p1.with_thermal(Arc::new(t1)).unwrap();
    let s = init_configuration(&p1, 3, 0).unwrap();
    assert!(s.positions().iter().map(|v| v * v).sum::<f64>() < 1.0);
}

#[test]
fn thermal_theta_must_match() {
    let t = solve_thermal_equilibrium(&PotentialSpec::quadratic(0.5).unwrap(), SpaceDim::TWO, 10.0, &GridSpec::Auto)
        .unwrap();
    assert!(quad_params(SpaceDim::TWO, 4, 1.0).with_thermal(Arc::new(t)).is_err());
    assert!(quad_params(SpaceDim::TWO, 4, 0.25).require_confinement_regime().is_err());
}

#[test]
fn free_gas_accepts_everything() {
    let p = quad_params(SpaceDim::THREE, 5, 0.0);
    let mut st = init_configuration(&p, 1, 0).unwrap();
    for _ in 0..500 {
        assert!(mh_step(&mut st, &p).unwrap());
    }
    assert_eq!(st.stats.accepted, 500);
}

#[test]
fn zero_energy_change_is_accepted() {
    let p = quad_params(SpaceDim::TWO, 3, 4.0);
    let st = init_configuration(&p, 2, 0).unwrap();
    let x = st.positions()[2..4].to_vec();
    assert_eq!(acceptance_probability(&p, st.positions(), 1, &x).unwrap(), 1.0);
    // Mirror image of a particle about the origin with V radial and N = 1.
    let p1 = quad_params(SpaceDim::TWO, 1, 4.0);
    assert_abs_diff_eq!(acceptance_probability(&p1, &[0.3, 0.4], 0, &[-0.4, 0.3]).unwrap(), 1.0, epsilon = 1e-14);
}

#[test]
fn detailed_balance_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (dim, n) in [(SpaceDim::TWO, 6), (SpaceDim::THREE, 5)] {
        let p = quad_params(dim, n, 1.5);
        let d = dim.get();
        for _ in 0..200 {
            let a: Vec<f64> = (0..n * d).map(|_| 3.0 * (rng.random::<f64>() - 0.5)).collect();
            let i = rng.random_range(0..n);
            let mut b = a.clone();
            for k in 0..d {
                b[i * d + k] += 0.7 * (rng.random::<f64>() - 0.5);
            }
            let ca = Configuration::from_flat(dim, a.clone()).unwrap();
            let cb = Configuration::from_flat(dim, b.clone()).unwrap();
            let (ha, hb) = (total_energy(&ca, &p.potential).unwrap(), total_energy(&cb, &p.potential).unwrap());
            let scale = 0.5;
            let fwd = proposal_density(&a[i * d..(i + 1) * d], &b[i * d..(i + 1) * d], scale)
                * acceptance_probability(&p, &a, i, &b[i * d..(i + 1) * d]).unwrap();
            let bwd = (-p.beta * (hb - ha)).exp()
                * proposal_density(&b[i * d..(i + 1) * d], &a[i * d..(i + 1) * d], scale)
                * acceptance_probability(&p, &b, i, &a[i * d..(i + 1) * d]).unwrap();
            assert!((fwd - bwd).abs() <= 1e-12 * fwd.max(bwd).max(1e-300), "{fwd} vs {bwd}");
        }
    }
}

#[test]
fn one_particle_matches_gaussian_marginal() {
    // N = 1, V = |x|²/2: each coordinate is N(0, 1/β).
    let beta = 1.0;
    let p = quad_params(SpaceDim::TWO, 1, beta);
    let set = run_chains(&p, 5, &ChainSchedule { burn_in_sweeps: 1000, thin_sweeps: 5, samples: 40_000 }, 1, Some(1))
        .unwrap();
    let x2: Vec<f64> = set.points().map(|x| x[0] * x[0]).collect();
    let (m, se) = batch_mean(&x2, 50);
    assert!((m - 1.0 / beta).abs() < 3.0 * se, "{m} ± {se}");
    let acc = set.header.acceptance;
    assert!(acc > 0.2 && acc < 0.6, "acceptance {acc}");
}

#[test]
fn schedule_bookkeeping_and_frozen_scale() {
    let p = quad_params(SpaceDim::TWO, 4, 2.0);
    let mut st = init_configuration(&p, 9, 0).unwrap();
    let set = run_chain(&mut st, &p, &ChainSchedule { burn_in_sweeps: 0, thin_sweeps: 2, samples: 37 }).unwrap();
    assert_eq!(set.len(), 37);
    assert!(st.is_frozen());
    assert_eq!(st.step_scale, INITIAL_STEP_SCALE);
    let mut st = init_configuration(&p, 9, 1).unwrap();
    let set = run_chain(&mut st, &p, &ChainSchedule { burn_in_sweeps: 200, thin_sweeps: 1, samples: 50 }).unwrap();
    assert_eq!(set.header.chains[0].step_scale, st.step_scale);
    st.recheck_energy(&p).unwrap();
    assert!(run_chain(&mut st, &p, &ChainSchedule { burn_in_sweeps: 0, thin_sweeps: 1, samples: 0 }).is_err());
    assert_eq!(ChainSchedule::defaults(64, 10), ChainSchedule { burn_in_sweeps: 12_800, thin_sweeps: 64, samples: 10 });
}

#[test]
fn reproducible_across_thread_counts() {
    let p = quad_params(SpaceDim::TWO, 8, 2.0);
    let sch = ChainSchedule { burn_in_sweeps: 50, thin_sweeps: 2, samples: 20 };
    let a = run_chains(&p, 42, &sch, 3, Some(1)).unwrap();
    let b = run_chains(&p, 42, &sch, 3, Some(3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.positions(), run_chains(&p, 43, &sch, 3, Some(1)).unwrap().positions());
    assert_eq!(a.header.chains.iter().map(|c| c.chain).collect::<Vec<_>>(), vec![0, 1, 2]);
}

#[test]
fn merge_is_order_independent() {
    let p = quad_params(SpaceDim::TWO, 3, 2.0);
    let sch = ChainSchedule { burn_in_sweeps: 10, thin_sweeps: 1, samples: 5 };
    let runs: Vec<SampleSet> =
        (0..3).map(|c| run_chain(&mut init_configuration(&p, 1, c).unwrap(), &p, &sch).unwrap()).collect();
    let fwd = SampleSet::merge(runs.clone()).unwrap();
    let rev = SampleSet::merge(runs.into_iter().rev().collect()).unwrap();
    assert_eq!(fwd, rev);
    assert_eq!(fwd.len(), 15);
}

#[test]
fn sample_file_roundtrip() {
    let p = quad_params(SpaceDim::THREE, 3, 1.0);
    let set = run_chains(&p, 4, &ChainSchedule { burn_in_sweeps: 5, thin_sweeps: 1, samples: 7 }, 2, Some(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.clss");
    set.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], SAMPLE_MAGIC);
    let back = SampleSet::load(&path).unwrap();
    assert_eq!(back, set);
    assert_eq!(back.sample(3), set.sample(3));
    let tail = &bytes[bytes.len() - 8..];
    assert_eq!(f64::from_le_bytes(tail.try_into().unwrap()), *set.positions().last().unwrap());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(SampleSet::read_from(&mut bad.as_slice()).is_err());
}

#[test]
fn rejection_single_particle_matches_direct_law() {
    // N = 1, d = 2, V = |x|²/2, β = 1: |x|² is exponential with mean 2.
    let p = quad_params(SpaceDim::TWO, 1, 1.0);
    let set = rejection_sample_small_n(&p, 8, 10_000).unwrap();
    let r2: Vec<f64> = set.points().map(|x| x[0] * x[0] + x[1] * x[1]).collect();
    let ks = ks_one(&r2, |t| 1.0 - (-t / 2.0).exp());
    assert!(ks < 0.02, "KS {ks}");
    assert!(set.header.acceptance > 0.0);
}

/// P(s² ≤ t) for s² ~ Gamma(k, θ) with k = 3/2, by Gauss–Legendre.
fn gamma_three_halves_cdf(t: f64, scale: f64) -> f64 {
    let gl = coulomb_kernel::GaussLegendre::new(64);
    let f = |u: f64| u.sqrt() * (-u / scale).exp();
    let norm = 0.5 * std::f64::consts::PI.sqrt() * scale.powf(1.5);
    let panels = 64;
    (0..panels).map(|k| gl.integrate(t * k as f64 / panels as f64, t * (k + 1) as f64 / panels as f64, f)).sum::<f64>()
        / norm
}

#[test]
fn pair_distance_law_for_two_particles() {
    // N = 2, d = 2, β = 1: u = x₁ − x₂ has density ∝ |u|^β e^{−β|u|²/4},
    // so |u|² ~ Gamma(3/2, 4).
    let p = quad_params(SpaceDim::TWO, 2, 1.0);
    let exact = rejection_sample_small_n(&p, 21, 10_000).unwrap();
    let d2 = |s: &[f64]| (s[0] - s[2]).powi(2) + (s[1] - s[3]).powi(2);
    let u2: Vec<f64> = exact.samples().map(d2).collect();
    let ks = ks_one(&u2, |t| gamma_three_halves_cdf(t, 4.0));
    assert!(ks < 0.02, "rejection KS {ks}");

    let mcmc =
        run_chains(&p, 21, &ChainSchedule { burn_in_sweeps: 500, thin_sweeps: 10, samples: 2500 }, 4, None).unwrap();
    let v2: Vec<f64> = mcmc.samples().map(d2).collect();
    // Total variation over 20 quantile bins of the exact law.
    let edges: Vec<f64> = (0..=20)
        .map(|k| {
            let target = k as f64 / 20.0;
            if k == 20 {
                return f64::INFINITY;
            }
            let (mut lo, mut hi) = (0.0, 100.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if gamma_three_halves_cdf(mid, 4.0) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let tv = 0.5
        * edges
            .windows(2)
            .map(|w| {
                let frac = v2.iter().filter(|&&t| t >= w[0] && t < w[1]).count() as f64 / v2.len() as f64;
                (frac - 0.05).abs()
            })
            .sum::<f64>();
    assert!(tv < 0.05, "TV {tv}");
    let ks2 = ks_two(&radii(&exact), &radii(&mcmc));
    assert!(ks2 < 0.03, "marginal KS {ks2}");
}

#[test]
fn chain_started_from_exact_samples_stays_stationary() {
    let p = quad_params(SpaceDim::THREE, 2, 1.0);
    let exact = rejection_sample_small_n(&p, 2, 4000).unwrap();
    let mut moved = Vec::new();
    for k in 0..exact.len() {
        let cfg = exact.configuration(k).unwrap();
        let mut st = ChainState::from_configuration(&p, &cfg, 77, k as u64).unwrap();
        for _ in 0..5 {
            sweep(&mut st, &p).unwrap();
        }
        moved.extend(st.positions().chunks(3).map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()));
    }
    let ks = ks_two(&radii(&exact), &moved);
    assert!(ks < 0.04, "KS {ks}");
}

#[test]
fn rejection_limits() {
    assert!(rejection_sample_small_n(&quad_params(SpaceDim::TWO, 4, 1.0), 1, 1).is_err());
    assert!(rejection_sample_small_n(&quad_params(SpaceDim::TWO, 2, 0.0), 1, 1).is_err());
}

#[test]
fn ginibre_moduli_have_gamma_means() {
    let p = quad_params(SpaceDim::TWO, 16, 2.0);
    let set = exact_ginibre(&p, 3, 2000).unwrap();
    // Σ|x_i|² = Σ_k Gamma(k,1) has mean N(N+1)/2 and variance N(N+1)/2.
    let sums: Vec<f64> = set.samples().map(|s| s.iter().map(|v| v * v).sum()).collect();
    let m = sums.iter().sum::<f64>() / sums.len() as f64;
    let se = (136.0 / sums.len() as f64).sqrt();
    assert!((m - 136.0).abs() < 4.0 * se, "{m}");
    assert!(exact_ginibre(&quad_params(SpaceDim::TWO, 16, 1.0), 3, 1).is_err());
}

#[test]
fn autocorrelation_of_ar1() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = 0.0;
    let series: Vec<f64> = (0..200_000)
        .map(|_| {
            let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            x = 0.5 * x + z;
            x
        })
        .collect();
    let tau = integrated_autocorrelation(&series);
    assert!((tau - 3.0).abs() < 0.15, "{tau}");
    assert_eq!(integrated_autocorrelation(&[1.0; 10]), 1.0);
}
