use std::sync::Arc;

use approx::assert_relative_eq;
use coulomb_equilibrium::{solve_equilibrium, EquilibriumData, GridSpec};
use coulomb_estimators::*;
use coulomb_kernel::{CartesianGrid, SpaceDim};
use coulomb_potential::PotentialSpec;
use coulomb_sampler::{exact_ginibre, rejection_sample_small_n, uniform_ball_samples, GasParams, SampleSet};

fn d2() -> SpaceDim {
    SpaceDim::new(2).unwrap()
}

fn quadratic_eq() -> Arc<EquilibriumData> {
    Arc::new(solve_equilibrium(&PotentialSpec::quadratic(0.5).unwrap(), d2(), &GridSpec::Auto).unwrap())
}

fn ginibre(n: usize, count: usize) -> (GasParams, SampleSet) {
    let params = GasParams::new(PotentialSpec::quadratic(0.5).unwrap(), d2(), n, 2.0)
        .unwrap()
        .with_equilibrium(quadratic_eq())
        .unwrap();
    let s = exact_ginibre(&params, 11, count).unwrap();
    (params, s)
}

#[test]
fn mgf_at_zero_and_covering_ball() {
    let (_, s) = ginibre(16, 200);
    let c = count_in_ball(&s, &[0.0, 0.0], 1e3, &[0.0, 0.3]).unwrap();
    assert!(c.counts.iter().all(|&k| k == 16));
    assert_eq!(c.mgf[0].value, 1.0);
    assert_eq!(c.mgf[0].std_error, 0.0);
    assert_relative_eq!(c.mgf[1].value, (0.3f64 * 16.0).exp(), max_relative = 1e-12);
    assert_eq!(c.variance, 0.0);
    assert!(count_in_ball(&s, &[0.0, 0.0], 0.0, &[]).is_err());
}

#[test]
fn rho1_integrates_to_n() {
    let s = uniform_ball_samples(d2(), 10, 3.0, 500, 5).unwrap();
    let rho = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 4.0)).unwrap();
    assert_eq!(rho.leakage, 0.0);
    assert_relative_eq!(rho.integral, 10.0, max_relative = 1e-12);
    assert!(rho.values.iter().all(|&v| v >= 0.0));
    // The origin is a bin centre.
    let k = rho.grid.locate_cell(&[0.0, 0.0]).unwrap();
    assert_relative_eq!(rho.grid.cell_center(k)[0], 0.0, epsilon = 1e-12);

    let narrow = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 1.0)).unwrap();
    assert!(narrow.leakage > 0.5);
    assert_relative_eq!(narrow.integral, 10.0 * (1.0 - narrow.leakage), max_relative = 1e-12);
}

#[test]
fn single_cold_particle_sits_in_the_central_bin() {
    let params = GasParams::new(PotentialSpec::quadratic(0.5).unwrap(), d2(), 1, 200.0).unwrap();
    let s = rejection_sample_small_n(&params, 3, 2000).unwrap();
    let rho = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 3.0)).unwrap();
    let centre = rho.grid.locate_cell(&[0.0, 0.0]).unwrap();
    let best = (0..rho.values.len()).max_by(|&a, &b| rho.values[a].total_cmp(&rho.values[b])).unwrap();
    assert_eq!(best, centre);
    assert!(rho.values[centre] * rho.grid.cell_volume() > 0.99);
}

#[test]
fn ball_counts_match_the_rho1_integral() {
    let (_, s) = ginibre(64, 4000);
    let c = count_in_ball(&s, &[0.0, 0.0], 2.0, &[]).unwrap();
    let xs: Vec<f64> = c.counts.iter().map(|&k| k as f64).collect();
    let (m, se) = batch_mean(&xs);
    let rho = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 14.0)).unwrap();
    let integral = rho.ball_integral(&[0.0, 0.0], 2.0);
    assert!((m - integral).abs() < 3.0 * se, "count {m} ± {se}, ρ̂₁ integral {integral}");
    // The Ginibre bulk density is 1/π.
    assert!((m - 4.0).abs() < 0.1);
}

#[test]
fn mean_value_test_on_synthetic_fields() {
    let grid = CartesianGrid::centered(2, 10.0, 0.5).unwrap();
    let balls = vec![(vec![1.0, -2.0], 2.0), (vec![-3.0, 0.5], 1.5), (vec![0.0, 0.0], 4.0)];

    let flat = DensityEstimate::from_field(grid.clone(), |_| 2.5);
    let r = mean_value_test(&flat, |_| 1.0, &balls).unwrap();
    for b in &r.balls {
        assert_relative_eq!(b.u_center, b.u_average, max_relative = 1e-12);
    }
    assert_eq!(r.violations_beyond_3se, 0);

    let bowl = DensityEstimate::from_field(grid, |x| x[0] * x[0] + x[1] * x[1]);
    let r = mean_value_test(&bowl, |_| 1.0, &balls).unwrap();
    for b in &r.balls {
        // ⨍ |x|² over the sphere exceeds |c|² by r²; bilinear error is at most h²/2.
        assert!(b.u_average - b.u_center > b.radius * b.radius - 0.125);
        assert_eq!(b.z, f64::NEG_INFINITY);
    }
    assert!(mean_value_test(&flat, |_| 1.0, &[(vec![0.0, 0.0], 0.5)]).is_err());
    assert!(mean_value_test(&flat, |_| 1.0, &[(vec![9.0, 0.0], 2.0)]).is_err());
}

#[test]
fn subharmonicity_rejects_balls_meeting_the_droplet() {
    let (params, s) = ginibre(16, 50);
    let eq = quadratic_eq();
    let rho = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 8.0)).unwrap();
    let err = subharmonicity_test(&rho, &eq, &params, &[(vec![4.5, 0.0], 1.0)]).unwrap_err();
    assert!(matches!(err, EstimatorError::Geometry(_)));
    assert!(subharmonicity_test(&rho, &eq, &params, &[(vec![6.0, 0.0], 1.0)]).is_ok());
}

#[test]
fn confinement_profile_basics() {
    let (params, s) = ginibre(16, 400);
    let eq = quadratic_eq();
    let rho = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 12.0)).unwrap();
    let p = confinement_profile(&rho, &eq, &params).unwrap();
    // Inside the droplet ζ = 0, so q is ρ̂₁ itself.
    let inner = &p.shells[0];
    assert!(!inner.exterior);
    let k = rho.grid.locate_cell(&[0.0, 0.0]).unwrap();
    assert_relative_eq!(inner.max_q, rho.values[k], max_relative = 1e-12);
    // Far shells see no particles.
    let last = p.shells.last().unwrap();
    assert!(last.exterior && last.observed == 0.0 && last.mean_q == 0.0 && !last.resolved);
    assert!(p.max_interior_rho > 0.0 && p.implied_c.is_finite());
}

#[test]
fn vacuum_tail_edges() {
    let (params, s) = ginibre(16, 300);
    let eq = quadratic_eq();
    let t = vacuum_tail(&s, &eq, &params, &[0.0, 1e3]).unwrap();
    assert_eq!(t.rows[0].empirical, 1.0);
    assert_eq!(t.rows[1].hits, 0);
    assert_eq!(t.rows[1].empirical, 0.0);
    assert!(t.rows[1].upper95 > 0.0 && t.rows[1].upper95 < 0.02);
    assert!(t.fitted_c.is_finite());
    for w in t.soft.windows(2) {
        assert!(w[1].empirical <= w[0].empirical);
    }
}

#[test]
fn tail_integral_matches_the_closed_form() {
    // V₁ = |x|²/2 in d = 2: ζ_N(r) = (r² − N)/2 − N log(r/√N) for r ≥ √N.
    let eq = quadratic_eq();
    let n = 16;
    let params = GasParams::new(PotentialSpec::quadratic(0.5).unwrap(), d2(), n, 1.0).unwrap();
    let got = space_integral(&eq, &params, |_, z| if z >= 1.0 { (-z).exp() } else { 0.0 });
    let zeta = |r: f64| 0.5 * (r * r - n as f64) - n as f64 * (r / 4.0).ln();
    let r1 = {
        let (mut lo, mut hi) = (4.0, 20.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if zeta(mid) < 1.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo
    };
    let gl = coulomb_kernel::GaussLegendre::new(32);
    let want: f64 = (0..200)
        .map(|k| {
            let (a, b) = (r1 + 0.1 * k as f64, r1 + 0.1 * (k + 1) as f64);
            gl.integrate(a, b, |r| std::f64::consts::TAU * r * (-zeta(r)).exp())
        })
        .sum();
    assert_relative_eq!(got, want, max_relative = 1e-3);
}

#[test]
fn farfield_geometry_gate() {
    let (params, s) = ginibre(16, 100);
    let eq = quadratic_eq();
    let err = farfield_conditional_check(&s, &eq, &params, Annulus { inner: 1.0, outer: 3.0 }, None).unwrap_err();
    assert!(matches!(err, EstimatorError::Geometry(_)));
    let far = farfield_conditional_check(&s, &eq, &params, Annulus { inner: 400.0, outer: 500.0 }, None).unwrap();
    assert_eq!(far.integral, 0.0);
    assert_eq!(far.empirical, 0.0);
    assert_eq!(far.bound_at_zero, 0.0);
    assert!(far.fitted_c.is_none());
}

#[test]
fn pair_density_of_independent_points_is_flat() {
    let n = 200;
    let radius = 20.0;
    let s = uniform_ball_samples(d2(), n, radius, 400, 8).unwrap();
    let table = estimate_rho2(&s, &[vec![0.0, 0.0]], &RadialBins { width: 0.5, count: 6 }, 2.0).unwrap();
    let area = std::f64::consts::PI * radius * radius;
    let want = (n * (n - 1)) as f64 / (area * area);
    for row in &table.rows {
        assert!((row.value - want).abs() < 4.0 * row.std_error, "{row:?} vs {want}");
    }
}

#[test]
fn synthetic_poisson_control() {
    let s = uniform_ball_samples(d2(), 1000, 15.0, 3000, 21).unwrap();
    let windows: Vec<Window> =
        [[0.0, 0.0], [2.0, 1.0], [-1.5, 2.5], [0.5, -3.0]].iter().map(|c| Window::cube(c, 1.0)).collect();
    let r = poisson_tests(&s, &windows).unwrap();
    assert_eq!(r.label, EVIDENCE_LABEL);
    for w in &r.windows {
        assert!((w.dispersion - 1.0).abs() <= 3.0 * w.dispersion_std_error, "{w:?}");
        assert!(w.tv_distance < 0.05);
    }
    assert!(r.rho1_flatness < 1.2);
}

#[test]
fn ginibre_counts_are_sub_poissonian() {
    let (params, s) = ginibre(64, 1000);
    let eq = quadratic_eq();
    let windows = vec![Window::cube(&[0.0, 0.0], 1.0)];
    let r = poisson_tests_in_bulk(&s, &eq, &params, &windows).unwrap();
    assert!(r.windows[0].dispersion < 1.0);
    let edge = vec![Window::cube(&[7.0, 0.0], 1.0)];
    assert!(matches!(poisson_tests_in_bulk(&s, &eq, &params, &edge), Err(EstimatorError::Geometry(_))));
}

#[test]
fn extreme_radius_summary() {
    let params = GasParams::new(PotentialSpec::quadratic(0.5).unwrap(), d2(), 1, 1.0).unwrap();
    let one = rejection_sample_small_n(&params, 1, 50).unwrap();
    let r = extreme_radius(&one).unwrap();
    for (k, m) in r.maxima.iter().enumerate() {
        let x = one.sample(k);
        assert_eq!(*m, (x[0] * x[0] + x[1] * x[1]).sqrt());
    }

    let (_, s) = ginibre(32, 500);
    let r = extreme_radius(&s).unwrap();
    for w in r.curve.windows(2) {
        assert!(w[1].radius > w[0].radius);
        assert!(w[1].empirical <= w[0].empirical);
    }
    assert!(r.quantiles.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(r.curve_below_bound);
    assert!(r.mean > 32f64.sqrt());
}

#[test]
fn rider_center_values() {
    assert!(rider_center(128).is_nan());
    assert_relative_eq!(rider_center(256), 16.0 + 0.5 * 0.2810f64.sqrt(), epsilon = 2e-3);
}

#[test]
fn reports_render_csv() {
    let (params, s) = ginibre(16, 100);
    let eq = quadratic_eq();
    let rho = estimate_rho1(&s, &BinSpec::new(DEFAULT_BIN, 8.0)).unwrap();
    assert!(rho.csv().lines().count() > 1);
    assert!(vacuum_tail(&s, &eq, &params, &[1.0]).unwrap().csv().starts_with("gamma,"));
    assert!(extreme_radius(&s).unwrap().csv().starts_with("t,"));
    let json = serde_json::to_string(&confinement_profile(&rho, &eq, &params).unwrap()).unwrap();
    assert!(json.contains("supExteriorQ"));
}
