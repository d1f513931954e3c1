use std::sync::Arc;

use approx::assert_abs_diff_eq;
use coulomb_equilibrium::*;
use coulomb_kernel::{CartesianGrid, SpaceDim};
use coulomb_potential::PotentialSpec;

fn quad() -> PotentialSpec {
    PotentialSpec::quadratic(0.5).unwrap()
}

#[test]
fn closed_form_quadratic_constants() {
    let d2 = solve_equilibrium(&quad(), SpaceDim::TWO, &GridSpec::Auto).unwrap();
    assert_abs_diff_eq!(d2.c_inf1(), 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(d2.energy1(), 0.375, epsilon = 1e-10);
    assert_abs_diff_eq!(d2.droplet().extent(), 1.0, epsilon = 1e-14);
    let d3 = solve_equilibrium(&quad(), SpaceDim::THREE, &GridSpec::Auto).unwrap();
    assert_abs_diff_eq!(d3.c_inf1(), 1.5, epsilon = 1e-14);
    assert_abs_diff_eq!(d3.energy1(), 0.9, epsilon = 1e-10);
    assert_abs_diff_eq!(d3.mu_inf1().density(&[0.1, 0.2, 0.0]), 3.0 / (4.0 * std::f64::consts::PI), epsilon = 1e-14);
}

#[test]
fn zeta_eval_example() {
    // ζ₁(r) = r²/2 − ln r − 1/2 outside the unit disk; at N = 4 and |x| = 4, y = 2.
    let eq = solve_equilibrium(&quad(), SpaceDim::TWO, &GridSpec::Auto).unwrap();
    let z = zeta_eval(&eq, 4, &[4.0, 0.0]);
    assert_abs_diff_eq!(z, 4.0 * (1.5 - 2f64.ln()), epsilon = 1e-12);
    assert_eq!(zeta_eval(&eq, 4, &[1.0, 0.5]), 0.0);
    assert_abs_diff_eq!(closed_form::zeta1(0.5, SpaceDim::TWO, 2.0), 1.5 - 2f64.ln(), epsilon = 1e-14);
}

#[test]
fn zeta_grows_quadratically_far_out() {
    let eq = solve_equilibrium(&quad(), SpaceDim::THREE, &GridSpec::Auto).unwrap();
    let z = |r: f64| eq.zeta1(&[r, 0.0, 0.0]);
    let alpha = (z(40.0) / z(20.0)).log2();
    assert!((alpha - 2.0).abs() < 0.01, "growth exponent {alpha}");
}

#[test]
fn radial_obstacle_matches_disk() {
    let h = 1.0 / 128.0;
    let eq = solve_equilibrium_numeric(&quad(), SpaceDim::TWO, &GridSpec::Radial { spacing: h, r_max: None }).unwrap();
    let radius = eq.droplet().extent();
    assert!((radius - 1.0).abs() < 2.0 * h, "radius {radius}");
    let prof = eq.mu_inf1().as_radial().unwrap();
    let rho = 1.0 / std::f64::consts::PI;
    let err = (0..prof.shells())
        .map(|k| {
            let (a, b) = (prof.edges()[k], prof.edges()[k + 1]);
            let exact = if b <= 1.0 {
                rho
            } else if a >= 1.0 {
                0.0
            } else {
                rho * (1.0 - a * a) / (b * b - a * a)
            };
            (prof.densities()[k] - exact).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 2e-2, "sup error {err}");
    assert_abs_diff_eq!(eq.c_inf1(), 0.5, epsilon = 1e-3);
    assert_abs_diff_eq!(eq.mu_inf1().total_mass(), 1.0, epsilon = 1e-9);
}

#[test]
fn radial_obstacle_matches_ball_in_3d() {
    let h = 1.0 / 128.0;
    let eq =
        solve_equilibrium_numeric(&quad(), SpaceDim::THREE, &GridSpec::Radial { spacing: h, r_max: None }).unwrap();
    assert!((eq.droplet().extent() - 1.0).abs() < 2.0 * h);
    assert_abs_diff_eq!(eq.c_inf1(), 1.5, epsilon = 1e-3);
    assert_abs_diff_eq!(eq.mu_inf1().density(&[0.3, 0.0, 0.2]), 3.0 / (4.0 * std::f64::consts::PI), epsilon = 1e-3);
    assert!(eq.zeta1(&[2.0, 0.0, 0.0]) > 0.0);
}

#[test]
fn quartic_radial_droplet() {
    // V = r⁴/4 in d = 2: μ = 2r²/π on the unit disk, c = V(1) = 1/4.
    let p = PotentialSpec::radial_from_fn(6.0, 600, |r| r.powi(4) / 4.0, |r| r.powi(3), 0.0).unwrap();
    let eq = solve_equilibrium(&p, SpaceDim::TWO, &GridSpec::Radial { spacing: 1.0 / 128.0, r_max: None }).unwrap();
    assert!((eq.droplet().extent() - 1.0).abs() < 2.0 / 128.0);
    assert_abs_diff_eq!(eq.c_inf1(), 0.25, epsilon = 1e-3);
    let r = 0.6;
    assert_abs_diff_eq!(eq.mu_inf1().density(&[r, 0.0]), 2.0 * r * r / std::f64::consts::PI, epsilon = 1e-2);
}

#[test]
fn cartesian_solver_recovers_ellipse() {
    // V = ½(αx² + γy²): uniform density (α+γ)/2π on the ellipse with semi-axes 1.25, 0.75.
    let (alpha, gamma) = (0.8, 4.0 / 3.0);
    let h = 1.0 / 32.0;
    let grid = CartesianGrid::new(vec![-2.0, -2.0], h, vec![129, 129]).unwrap();
    let values = (0..grid.len())
        .map(|k| {
            let x = grid.node(k);
            0.5 * (alpha * x[0] * x[0] + gamma * x[1] * x[1])
        })
        .collect();
    let p = PotentialSpec::grid_sampled(grid, values).unwrap();
    let eq = solve_equilibrium(&p, SpaceDim::TWO, &GridSpec::Cartesian { spacing: h, half_width: None }).unwrap();
    let rho = (alpha + gamma) / (2.0 * std::f64::consts::PI);
    for x in [[0.0, 0.0], [0.6, 0.2], [-0.9, 0.1], [0.0, -0.5]] {
        assert_abs_diff_eq!(eq.mu_inf1().density(&x), rho, epsilon = 1e-2);
    }
    assert!(eq.droplet().contains(&[1.15, 0.0]) && !eq.droplet().contains(&[1.35, 0.0]));
    assert!(eq.droplet().contains(&[0.0, 0.65]) && !eq.droplet().contains(&[0.0, 0.85]));
    assert_abs_diff_eq!(eq.mu_inf1().total_mass(), 1.0, epsilon = 1e-6);
    // Boundary cells count whole: up to half a perimeter (≈ 6.3) times h.
    assert_abs_diff_eq!(eq.droplet().volume(SpaceDim::TWO), std::f64::consts::PI * 1.25 * 0.75, epsilon = 3.2 * h);
}

#[test]
fn nonradial_three_dimensional_is_rejected() {
    let grid = CartesianGrid::new(vec![-2.0, -2.0], 0.25, vec![17, 17]).unwrap();
    let p = PotentialSpec::grid_sampled(grid, vec![0.0; 17 * 17]).unwrap();
    let err = solve_equilibrium(&p, SpaceDim::THREE, &GridSpec::Auto).unwrap_err();
    assert!(matches!(err, EquilibriumError::UnsupportedGeometry(_) | EquilibriumError::Potential(_)), "{err}");
}

#[test]
fn thermal_rejects_low_theta() {
    assert!(solve_thermal_equilibrium(&quad(), SpaceDim::TWO, 2.0, &GridSpec::Auto).is_err());
}

#[test]
fn thermal_matches_ode_shooting() {
    // Radial shooting for u'' + u'/r = θ(2πe^u − 2), μ = e^u, unit mass.
    let t = solve_thermal_equilibrium(
        &quad(),
        SpaceDim::TWO,
        5.0,
        &GridSpec::Radial { spacing: 1.0 / 1024.0, r_max: None },
    )
    .unwrap();
    assert!(t.residual() < THERMAL_TOL);
    assert_abs_diff_eq!(t.mu_theta1().total_mass(), 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(t.c_theta1(), 0.0194850343, epsilon = 1e-6);
    assert_abs_diff_eq!(t.density1(&[0.0, 0.0]), 0.2658435062, epsilon = 1e-4);
}

#[test]
fn thermal_report_bounds() {
    let eq = solve_equilibrium(&quad(), SpaceDim::TWO, &GridSpec::Auto).unwrap();
    let t = solve_thermal_from(&eq, 200.0, &GridSpec::Auto).unwrap();
    let rep = thermal_properties_report(&t, &eq);
    assert!(rep.residual < THERMAL_TOL);
    assert!(rep.interior_sup_distance < 5e-2, "{}", rep.interior_sup_distance);
    assert!(rep.h_log_deviation.unwrap() < 1e-9);
    assert!(rep.mu_sup < 1.0);

    // Far-field ratio plateaus at e^{θ(c_θ − c∞)}.
    let t5 = solve_thermal_from(&eq, 5.0, &GridSpec::Auto).unwrap();
    let rep5 = thermal_properties_report(&t5, &eq);
    let plateau = (5.0 * (t5.c_theta1() - eq.c_inf1())).exp();
    assert_abs_diff_eq!(rep5.convert_ratio_min, plateau, epsilon = 1e-3);
    assert_abs_diff_eq!(plateau, 0.0904847, epsilon = 1e-5);

    let eq3 = solve_equilibrium(&quad(), SpaceDim::THREE, &GridSpec::Auto).unwrap();
    let t3 = solve_thermal_from(&eq3, 20.0, &GridSpec::Auto).unwrap();
    let rep3 = thermal_properties_report(&t3, &eq3);
    assert!(rep3.h_min.unwrap() > 0.0);
    assert_abs_diff_eq!(t3.mu_theta1().total_mass(), 1.0, epsilon = 1e-10);
}

#[test]
fn rescaling_is_consistent() {
    let eq = solve_equilibrium(&quad(), SpaceDim::TWO, &GridSpec::Auto).unwrap();
    let n = 64;
    let nf = n as f64;
    assert_abs_diff_eq!(eq.c_inf(n), nf * 0.5 - 0.5 * nf * nf.ln(), epsilon = 1e-10);
    assert_abs_diff_eq!(eq.energy(n), nf * nf * 0.375 - 0.25 * nf * nf * nf.ln(), epsilon = 1e-6);
    // h^{μ∞,N} + V_N = c∞,N on the microscopic droplet.
    let mu_n = eq.mu_inf(n);
    let x = [3.0, -2.0];
    let lhs = mu_n.potential(&x).unwrap() + 0.5 * (x[0] * x[0] + x[1] * x[1]);
    assert_abs_diff_eq!(lhs, eq.c_inf(n), epsilon = 1e-9);
    assert!(eq.in_droplet_n(n, &x) && !eq.in_droplet_n(n, &[8.1, 0.0]));

    let t = solve_thermal_from(&eq, 10.0, &GridSpec::Auto).unwrap();
    let y = [0.3, 0.4];
    let xn: Vec<f64> = y.iter().map(|v| v * nf.sqrt()).collect();
    assert_abs_diff_eq!(t.density_n(n, &xn), t.density1(&y), epsilon = 1e-12);
    assert_abs_diff_eq!(t.mu_theta(n).total_mass(), nf, epsilon = 1e-8);
    assert_abs_diff_eq!(t.c_theta(n), scaled_constant(SpaceDim::TWO, t.c_theta1(), n), epsilon = 1e-12);
}

#[test]
fn artifacts_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let eq = solve_equilibrium_numeric(&quad(), SpaceDim::TWO, &GridSpec::Radial { spacing: 1.0 / 64.0, r_max: None })
        .unwrap();
    let stem = dir.path().join("eq");
    save_equilibrium(&eq, &stem).unwrap();
    let back = load_equilibrium(&stem).unwrap();
    assert_eq!(back.c_inf1(), eq.c_inf1());
    for x in [[0.2, 0.1], [1.5, 0.0], [0.0, 3.0]] {
        assert_abs_diff_eq!(back.zeta1(&x), eq.zeta1(&x), epsilon = 1e-14);
    }
    assert_eq!(back.droplet(), eq.droplet());

    let t = solve_thermal_from(&eq, 8.0, &GridSpec::Auto).unwrap();
    let tstem = dir.path().join("thermal");
    save_thermal(&t, &tstem).unwrap();
    let tb = load_thermal(&tstem).unwrap();
    assert_eq!(tb.c_theta1(), t.c_theta1());
    assert_eq!(tb.theta(), t.theta());
    assert_abs_diff_eq!(tb.density1(&[2.0, 0.5]), t.density1(&[2.0, 0.5]), epsilon = 1e-14);
    assert!(load_equilibrium(&dir.path().join("missing")).is_err());
}

#[test]
fn shared_potential_is_reused() {
    let eq = solve_equilibrium(&quad(), SpaceDim::TWO, &GridSpec::Auto).unwrap();
    assert!(Arc::ptr_eq(&eq.potential_arc(), &eq.potential_arc()));
}
