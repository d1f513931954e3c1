use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use coulomb_equilibrium::{solve_equilibrium, solve_thermal_equilibrium, EquilibriumData, GridSpec};
use coulomb_kernel::{green_point_source, Ball, CartesianGrid, Configuration, DiscreteMeasure, SpaceDim};
use coulomb_oracle::*;
use coulomb_potential::{PotentialSpec, ScaledPotential};
use coulomb_sampler::GasParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quad() -> PotentialSpec {
    PotentialSpec::quadratic(0.5).unwrap()
}

fn eq(dim: SpaceDim) -> EquilibriumData {
    solve_equilibrium(&quad(), dim, &GridSpec::Auto).unwrap()
}

fn random_config(rng: &mut ChaCha8Rng, dim: SpaceDim, n: usize, half_width: f64) -> Configuration {
    let flat = (0..n * dim.get()).map(|_| rng.random_range(-half_width..half_width)).collect();
    Configuration::from_flat(dim, flat).unwrap()
}

/// I₀ by its power series.
fn bessel_i0(x: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..60 {
        term *= (0.5 * x) * (0.5 * x) / (k * k) as f64;
        sum += term;
    }
    sum
}

#[test]
fn split_identity_quadratic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [SpaceDim::TWO, SpaceDim::THREE] {
        let eq = eq(dim);
        let n = 20;
        let p = ScaledPotential::new(quad(), dim, n).unwrap();
        let scale = (n as f64).powf(1.0 / dim.get() as f64);
        for _ in 0..100 {
            let x = random_config(&mut rng, dim, n, 1.5 * scale);
            let r = check_split_identity(&x, &eq, &p).unwrap();
            assert!(r.relative < 1e-8, "d = {} relative residual {}", dim.get(), r.relative);
        }
    }
}

#[test]
fn split_identity_grid_solved_radial() {
    let quartic = PotentialSpec::radial_from_fn(4.0, 4096, |r| r.powi(4) / 4.0, |r| r.powi(3), 0.0).unwrap();
    let eq =
        solve_equilibrium(&quartic, SpaceDim::TWO, &GridSpec::Radial { spacing: 1.0 / 256.0, r_max: None }).unwrap();
    let n = 20;
    let p = ScaledPotential::new(quartic, SpaceDim::TWO, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let x = random_config(&mut rng, SpaceDim::TWO, n, 5.0);
        let r = check_split_identity(&x, &eq, &p).unwrap();
        assert!(r.relative < 5e-4, "relative residual {}", r.relative);
    }
}

#[test]
fn split_identity_rejects_mismatched_n() {
    let eq = eq(SpaceDim::TWO);
    let p = ScaledPotential::new(quad(), SpaceDim::TWO, 4).unwrap();
    let x = Configuration::from_flat(SpaceDim::TWO, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    assert!(matches!(check_split_identity(&x, &eq, &p), Err(OracleError::InvalidArgument(_))));
}

#[test]
fn thermal_split_random_configs() {
    let n = 10;
    let beta = 1.0;
    let t = Arc::new(solve_thermal_equilibrium(&quad(), SpaceDim::TWO, beta * n as f64, &GridSpec::Auto).unwrap());
    let params = GasParams::new(quad(), SpaceDim::TWO, n, beta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let x = random_config(&mut rng, SpaceDim::TWO, n, 4.0);
        let r = check_split_thermal(&x, &t, &params).unwrap();
        assert!(r.log_residual < 1e-6, "log-residual {}", r.log_residual);
    }
}

#[test]
fn thermal_split_single_particle() {
    let t = solve_thermal_equilibrium(&quad(), SpaceDim::TWO, 5.0, &GridSpec::Auto).unwrap();
    let params = GasParams::new(quad(), SpaceDim::TWO, 1, 5.0).unwrap();
    for x in [[0.0, 0.0], [0.4, -0.3], [1.7, 0.2]] {
        let c = Configuration::from_flat(SpaceDim::TWO, x.to_vec()).unwrap();
        let r = check_split_thermal(&c, &t, &params).unwrap();
        assert!(r.log_residual < 1e-6, "log-residual {}", r.log_residual);
    }
}

#[test]
fn thermal_split_detects_shifted_constant() {
    // Σ log μ_θ(x_i) moves by −Nθ N^{−2/d}δc = −Nβδc when c_θ moves by δc.
    let n = 10;
    let beta = 1.0;
    let t = solve_thermal_equilibrium(&quad(), SpaceDim::TWO, beta * n as f64, &GridSpec::Auto).unwrap();
    let params = GasParams::new(quad(), SpaceDim::TWO, n, beta).unwrap();
    let x = random_config(&mut ChaCha8Rng::seed_from_u64(14), SpaceDim::TWO, n, 3.0);
    let base = check_split_thermal(&x, &t, &params).unwrap();
    let shifted_sum: f64 = x.points().map(|p| t.log_density_n(n, p) - beta * 1e-3).sum();
    let shift = (base.log_boltzmann - (-base.beta_free_energy - base.beta_jellium + shifted_sum)).abs();
    assert_abs_diff_eq!(shift, n as f64 * beta * 1e-3, epsilon = 1e-6);
}

#[test]
fn iso_energy_alone_in_empty_background() {
    let dim = SpaceDim::TWO;
    let x = Configuration::from_flat(dim, vec![0.2, 0.1]).unwrap();
    let r = check_iso_energy(&x, 0, &[0.0, 0.0], 1.0, &DiscreteMeasure::zero(dim)).unwrap();
    assert_abs_diff_eq!(r.correction, 0.0, epsilon = 1e-14);
    assert!(r.residual < 1e-12, "residual {}", r.residual);
}

#[test]
fn iso_energy_exterior_particle_has_no_correction() {
    for dim in [SpaceDim::TWO, SpaceDim::THREE] {
        let d = dim.get();
        let mut flat = vec![0.0; 2 * d];
        flat[0] = 0.3;
        flat[d] = 2.5;
        let x = Configuration::from_flat(dim, flat).unwrap();
        let r = check_iso_energy(&x, 0, &vec![0.0; d], 1.0, &DiscreteMeasure::zero(dim)).unwrap();
        assert_abs_diff_eq!(r.correction, 0.0, epsilon = 1e-12);
        assert!(r.residual < 1e-6, "d = {d} residual {}", r.residual);
    }
}

#[test]
fn iso_energy_interior_particle_matches_image_charge() {
    for dim in [SpaceDim::TWO, SpaceDim::THREE] {
        let d = dim.get();
        let mut xi = vec![0.0; d];
        xi[0] = 0.25;
        let mut y = vec![0.0; d];
        y[1] = -0.3;
        let x = Configuration::from_points(dim, &[xi.clone(), y.clone()]).unwrap();
        let r = check_iso_energy(&x, 0, &vec![0.0; d], 1.0, &DiscreteMeasure::zero(dim)).unwrap();
        let ball = Ball::new(vec![0.0; d], 1.0).unwrap();
        let g = green_point_source(&ball, &xi, &y, dim).unwrap();
        assert_abs_diff_eq!(r.correction, g, epsilon = 1e-10);
        assert!(r.residual < 1e-6, "d = {d} residual {}", r.residual);
    }
}

#[test]
fn iso_energy_with_background_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for dim in [SpaceDim::TWO, SpaceDim::THREE] {
        let d = dim.get();
        let mu = DiscreteMeasure::uniform_ball(dim, 2.0, 5.0).unwrap();
        for _ in 0..10 {
            let x = random_config(&mut rng, dim, 5, 2.0);
            let center: Vec<f64> = x.point(0).iter().map(|c| c + rng.random_range(-0.2..0.2)).collect();
            let radius = rng.random_range(0.5..1.0);
            // A 512-node rule on S² is exact only to degree 31, which limits d = 3.
            let budget = if dim.is_two() { 1e-6 } else { 1e-3 };
            match check_iso_energy(&x, 0, &center, radius, &mu) {
                Ok(r) => assert!(r.residual < budget, "d = {d} residual {}", r.residual),
                Err(OracleError::Geometry(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn iso_energy_rejects_particle_on_sphere() {
    let dim = SpaceDim::TWO;
    let x = Configuration::from_flat(dim, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let err = check_iso_energy(&x, 0, &[0.0, 0.0], 1.0, &DiscreteMeasure::zero(dim)).unwrap_err();
    assert!(matches!(err, OracleError::Geometry(_)));
}

#[test]
fn iso_adjoint_constants() {
    for dim in [SpaceDim::TWO, SpaceDim::THREE] {
        let d = dim.get();
        let r = check_iso_adjoint(&vec![0.0; d], 1.5, dim, |_| 2.0, |_| 3.0, AdjointRule::default()).unwrap();
        let volume = dim.ball_volume_r(1.5);
        assert!((r.volume_side / (6.0 * volume) - 1.0).abs() < 1e-10, "d = {d}: {}", r.volume_side);
        assert!((r.boundary_side / (6.0 * volume) - 1.0).abs() < 1e-10, "d = {d}: {}", r.boundary_side);
    }
}

#[test]
fn iso_adjoint_conserves_mass() {
    let f = |x: &[f64]| (x[0] + 0.5 * x[1]).cos() + x[1] * x[1];
    let r = check_iso_adjoint(&[0.1, -0.2], 1.0, SpaceDim::TWO, f, |_| 1.0, AdjointRule::default()).unwrap();
    assert!(r.residual < 1e-4, "residual {}", r.residual);
}

#[test]
fn iso_adjoint_smooth_fields() {
    let f = |x: &[f64]| (1.0 + x[0] * x[0]).recip() + x[1].sin();
    let g = |x: &[f64]| (2.0 * x[0] - x[1]).exp();
    let r = check_iso_adjoint(&[0.0, 0.0], 1.0, SpaceDim::TWO, f, g, AdjointRule::default()).unwrap();
    assert!(r.residual < 1e-4, "residual {} (quadrature error {})", r.residual, r.quadrature_error);
}

fn free_box_gas() -> QuadratureGas {
    let grid = CartesianGrid::new(vec![-1.0, -1.0], 0.25, vec![9, 9]).unwrap();
    let flat = PotentialSpec::grid_sampled(grid, vec![0.0; 81]).unwrap();
    QuadratureGas::new(GasParams::new(flat, SpaceDim::TWO, 1, 0.0).unwrap(), 4).unwrap()
}

#[test]
fn quadrature_single_particle_is_gaussian() {
    let beta = 1.5;
    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 1, beta).unwrap(), 6).unwrap();
    let rho = gas.conditional(&[]).unwrap();
    for x in [[0.0, 0.0], [0.5, -1.0], [2.0, 1.0]] {
        let exact = beta / (2.0 * PI) * (-0.5 * beta * (x[0] * x[0] + x[1] * x[1])).exp();
        assert_abs_diff_eq!(rho.at(&x), exact, epsilon = 1e-9);
    }
    assert_abs_diff_eq!(rho.mass(), 1.0, epsilon = 1e-10);
}

#[test]
fn quadrature_pair_is_radially_symmetric() {
    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 2, 1.0).unwrap(), 3).unwrap();
    let rho = gas.conditional(&[]).unwrap();
    let a = rho.at(&[1.0, 0.0]);
    let b = rho.at(&[0.6, 0.8]);
    assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
}

#[test]
fn quadrature_rho1_converges_under_refinement() {
    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 1, 1.0).unwrap(), 4).unwrap();
    assert!(refinement_change(&gas, &[]).unwrap() < 1e-4);
    let est = quadrature_rho1(&gas, &[]).unwrap();
    assert_abs_diff_eq!(est.integral, 1.0, epsilon = 1e-3);
}

#[test]
fn quadrature_rejects_large_n() {
    let params = GasParams::new(quad(), SpaceDim::TWO, 4, 1.0).unwrap();
    assert!(QuadratureGas::new(params, 4).is_err());
}

#[test]
fn one_point_iso_free_box_is_an_equality() {
    // At β = 0 both prefactors are 1 and the equilibrium data never enters.
    let gas = free_box_gas();
    let report =
        check_1pt_iso(&gas, &eq(SpaceDim::TWO), &[(vec![0.0, 0.0], 0.5), (vec![0.2, -0.1], 0.4)], &[]).unwrap();
    for row in &report.rows {
        assert_abs_diff_eq!(row.margin, 0.0, epsilon = 1e-10);
    }
    assert!(report.holds);
}

#[test]
fn one_point_iso_single_particle_margin() {
    let beta = 1.0;
    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 1, beta).unwrap(), 6).unwrap();
    let (c, r) = ([0.8, 0.3], 0.5);
    let report = check_1pt_iso(&gas, &eq(SpaceDim::TWO), &[(c.to_vec(), r)], &[]).unwrap();
    assert!(report.holds, "max violation {}", report.max_violation);
    let row = report.rows.iter().find(|row| row.label == "laplacian" && row.point == c.to_vec()).unwrap();
    let norm_c = (c[0] * c[0] + c[1] * c[1]).sqrt();
    let rho_c = beta / (2.0 * PI) * (-0.5 * beta * norm_c * norm_c).exp();
    assert_abs_diff_eq!(row.margin, rho_c * (bessel_i0(beta * r * norm_c) - 1.0), epsilon = 1e-6);
    assert!(row.margin > 0.0);
}

#[test]
fn one_point_iso_conditioned_pair() {
    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 2, 1.0).unwrap(), 3).unwrap();
    let y2 = vec![0.3, 0.25];
    let report =
        check_1pt_iso(&gas, &eq(SpaceDim::TWO), &[(vec![0.0, 0.0], 0.8), (vec![1.5, 0.0], 0.6)], &[y2]).unwrap();
    assert!(report.holds, "max violation {}", report.max_violation);
}

#[test]
fn kpt_constants() {
    assert_abs_diff_eq!(kpt_annulus_constant(SpaceDim::TWO), 4.0 / (3.0 * PI), epsilon = 1e-15);
    assert_abs_diff_eq!(kpt_annulus_constant(SpaceDim::THREE), 6.0 / (7.0 * PI), epsilon = 1e-15);
    assert_abs_diff_eq!(kpt_laplacian_constant(SpaceDim::THREE), 1.0 / 6.0, epsilon = 1e-15);
}

#[test]
fn kpt_free_box_has_positive_margin() {
    let gas = free_box_gas();
    let report = check_kpt_comp(&gas, &[(vec![0.0, 0.0], 0.5)], &[]).unwrap();
    // ρ constant: rhs/lhs = C_ann |B₁| = 1/(1 − 2^{−d}).
    let row = &report.rows[0];
    assert_abs_diff_eq!(row.rhs / row.lhs, 4.0 / 3.0, epsilon = 1e-8);
}

#[test]
fn kpt_single_particle_and_pair() {
    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 1, 2.0).unwrap(), 6).unwrap();
    let pairs: Vec<(Vec<f64>, f64)> = [[0.0, 0.0], [1.0, 0.5], [2.5, -1.0]].iter().map(|y| (y.to_vec(), 0.7)).collect();
    let report = check_kpt_comp(&gas, &pairs, &[]).unwrap();
    assert!(report.holds && report.rows.iter().all(|r| r.margin > 0.0));

    let gas = QuadratureGas::new(GasParams::new(quad(), SpaceDim::TWO, 2, 2.0).unwrap(), 3).unwrap();
    let r = 0.8;
    let report = check_kpt_comp(&gas, &[(vec![0.5, 0.0], r)], &[vec![0.5 + r / 4.0, 0.0]]).unwrap();
    assert!(report.holds, "max violation {}", report.max_violation);
}

fn g3(r: f64) -> f64 {
    1.0 / r
}

#[test]
fn squeeze_three_particles_matches_hand_expansion() {
    let n = 3;
    let eq = eq(SpaceDim::THREE);
    let x1 = [0.0, 0.9, 0.0];
    let x2 = [0.5, 0.0, 0.1];
    let x3 = [-0.6, 0.0, -0.1];
    let config = Configuration::from_points(SpaceDim::THREE, &[x1, x2, x3]).unwrap();
    let report = check_squeeze(&config, &eq).unwrap();

    let nf = n as f64;
    let radius = nf.cbrt();
    // ∬ g dμ dμ for a uniform ball of mass N and radius R is 6N²/(5R).
    let self_energy = 6.0 * nf * nf / (5.0 * radius);
    let h = |x: &[f64; 3]| (3.0 * nf.powf(2.0 / 3.0) - x.iter().map(|v| v * v).sum::<f64>()) / 2.0;
    let dist = ((x2[0] - x3[0]).powi(2) + (x2[1] - x3[1]).powi(2) + (x2[2] - x3[2]).powi(2)).sqrt();
    assert!(dist >= 1.0);
    let eta = 0.25;
    let f_rest = g3(dist) - h(&x2) - h(&x3) + 0.5 * self_energy;
    let shell = |x: &[f64; 3]| 9.0 / (7.0 * eta) + g3(dist) - (h(x) - 93.0 / 280.0 * eta * eta);
    let lhs = f_rest + 0.5 * (shell(&x2) + shell(&x3));
    let rhs = 1.5 * f_rest - self_energy / 4.0;
    assert_eq!(report.tilde_eta, vec![eta, eta]);
    assert_abs_diff_eq!(report.lhs, lhs, epsilon = 1e-6);
    assert_abs_diff_eq!(report.rhs_main, rhs, epsilon = 1e-6);
}

#[test]
fn squeeze_lattice_and_tight_pair() {
    let eq = eq(SpaceDim::THREE);
    let mut lattice = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                lattice.push([i as f64 - 0.5, j as f64 - 0.5, k as f64 - 0.5]);
            }
        }
    }
    let spaced = check_squeeze(&Configuration::from_points(SpaceDim::THREE, &lattice).unwrap(), &eq).unwrap();
    assert!(spaced.tilde_eta.iter().all(|&e| e == 0.25));
    assert!(spaced.implied_c.is_finite() && spaced.implied_c.abs() < 10.0, "implied C {}", spaced.implied_c);

    let mut tight = lattice.clone();
    tight[7] = [tight[6][0] + 0.01, tight[6][1], tight[6][2]];
    let report = check_squeeze(&Configuration::from_points(SpaceDim::THREE, &tight).unwrap(), &eq).unwrap();
    assert!(report.spacing_sum > spaced.spacing_sum + 100.0);
    assert!(report.implied_c.is_finite());
}

#[test]
fn squeeze_rejects_bad_input() {
    let eq3 = eq(SpaceDim::THREE);
    let pair = Configuration::from_flat(SpaceDim::THREE, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!(matches!(check_squeeze(&pair, &eq3), Err(OracleError::InvalidArgument(_))));
    let coincident =
        Configuration::from_flat(SpaceDim::THREE, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!(matches!(check_squeeze(&coincident, &eq3), Err(OracleError::DegenerateConfig(_))));
    let planar = Configuration::from_flat(SpaceDim::TWO, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(check_squeeze(&planar, &eq(SpaceDim::TWO)).is_err());
}

#[test]
fn eta_energy_single_particle() {
    let dim = SpaceDim::THREE;
    let x = Configuration::from_flat(dim, vec![0.1, 0.0, 0.0]).unwrap();
    let mu = DiscreteMeasure::uniform_ball(dim, 1.0, 1.0).unwrap();
    let r = check_eta_energy(&x, &mu).unwrap();
    assert_eq!(r.eta, vec![0.25]);
    assert_abs_diff_eq!(r.excess_per_particle, 4.0 - 2.0 * r.jellium, epsilon = 1e-12);
}

#[test]
fn eta_energy_tight_pair_ratio_stays_bounded() {
    let dim = SpaceDim::THREE;
    let mu = DiscreteMeasure::uniform_ball(dim, 2.0f64.cbrt(), 2.0).unwrap();
    let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&s| {
            let x = Configuration::from_flat(dim, vec![-s / 2.0, 0.0, 0.0, s / 2.0, 0.0, 0.0]).unwrap();
            check_eta_energy(&x, &mu).unwrap().ratio.unwrap()
        })
        .collect();
    // Σ g(η) = 8/s against 2F ≈ 2/s.
    for r in &ratios {
        assert!(*r > 1.0 && *r < 6.0, "ratios {ratios:?}");
    }
    assert_abs_diff_eq!(ratios[3], 4.0, epsilon = 1e-2);
}
