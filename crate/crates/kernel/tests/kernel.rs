use std::f64::consts::{E, PI};

use approx::assert_relative_eq;
use coulomb_kernel::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const D2: SpaceDim = SpaceDim::TWO;
const D3: SpaceDim = SpaceDim::THREE;

/// V(x) = a|x|², for tests that need a confinement.
struct Quad(SpaceDim, f64);

impl Confinement for Quad {
    fn dim(&self) -> SpaceDim {
        self.0
    }
    fn value(&self, x: &[f64]) -> Option<f64> {
        Some(self.1 * x.iter().map(|v| v * v).sum::<f64>())
    }
}

#[test]
fn kernel_values() {
    assert_eq!(coulomb_kernel(&[1.0, 0.0], D2).unwrap(), 0.0);
    assert_eq!(coulomb_kernel(&[2.0, 0.0, 0.0], D3).unwrap(), 0.5);
    assert_relative_eq!(coulomb_kernel(&[E, 0.0], D2).unwrap(), -1.0, epsilon = 1e-15);
    assert_eq!(coulomb_kernel(&[0.0, 0.0], D2), Err(KernelError::Singular));
    assert!(coulomb_kernel(&[1.0, 0.0, 0.0], D2).is_err());
}

#[test]
fn fundamental_constants() {
    assert_eq!(fundamental_constant(D2), 2.0 * PI);
    assert_eq!(fundamental_constant(D3), 4.0 * PI);
    assert_eq!(fundamental_constant_of(4), Err(KernelError::UnsupportedDim(4)));
    assert!(SpaceDim::new(1).is_err());
}

#[test]
fn total_energy_examples() {
    let one = Configuration::from_points(D2, &[[3.0, -1.0]]).unwrap();
    assert_eq!(total_energy(&one, &FreeSpace(D2)).unwrap(), 0.0);

    let two = Configuration::from_points(D2, &[[0.0, 0.0], [1.0, 0.0]]).unwrap();
    assert_eq!(total_energy(&two, &FreeSpace(D2)).unwrap(), 0.0);

    let r = 0.7;
    let h = r * 3f64.sqrt() / 2.0;
    let tri = Configuration::from_points(D3, &[[0.0, 0.0, 0.0], [r, 0.0, 0.0], [r / 2.0, h, 0.0]]).unwrap();
    assert_relative_eq!(total_energy(&tri, &FreeSpace(D3)).unwrap(), 3.0 / r, max_relative = 1e-14);

    let dup = Configuration::from_points(D2, &[[1.0, 1.0], [1.0, 1.0]]).unwrap();
    assert_eq!(total_energy(&dup, &FreeSpace(D2)), Err(KernelError::Singular));
}

#[test]
fn energy_delta_examples() {
    let c = Configuration::from_points(D3, &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
    assert_eq!(energy_delta(&c, 1, &[1.0, 0.0, 0.0], &FreeSpace(D3)).unwrap(), 0.0);
    assert_relative_eq!(energy_delta(&c, 1, &[2.0, 0.0, 0.0], &FreeSpace(D3)).unwrap(), -0.5, epsilon = 1e-15);
}

#[test]
fn energy_delta_matches_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let dim = if trial % 2 == 0 { D2 } else { D3 };
        let d = dim.get();
        let n = rng.random_range(2..40);
        let flat: Vec<f64> = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let c = Configuration::from_flat(dim, flat).unwrap();
        let i = rng.random_range(0..n);
        let new: Vec<f64> = c.point(i).iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
        let pot = Quad(dim, 0.3);
        let delta = energy_delta(&c, i, &new, &pot).unwrap();
        let direct = total_energy(&c.with_moved(i, &new).unwrap(), &pot).unwrap() - total_energy(&c, &pot).unwrap();
        let scale = total_energy(&c, &pot).unwrap().abs().max(1.0);
        assert!((delta - direct).abs() <= 1e-10 * scale, "trial {trial}: {delta} vs {direct}");
    }
}

fn disk_measure() -> DiscreteMeasure {
    DiscreteMeasure::uniform_ball(D2, 1.0, 1.0).unwrap()
}

#[test]
fn newton_potentials() {
    let eps = 1e-3;
    let point_like = DiscreteMeasure::uniform_ball(D3, eps, 1.0).unwrap();
    assert_relative_eq!(electric_potential(&point_like, &[2.0, 0.0, 0.0]).unwrap(), 0.5, epsilon = 1e-12);

    let mu = disk_measure();
    assert_relative_eq!(electric_potential(&mu, &[2.0, 0.0]).unwrap(), -(2f64.ln()), epsilon = 1e-14);
    assert_relative_eq!(electric_potential(&mu, &[0.0, 0.0]).unwrap(), 0.5, epsilon = 1e-14);
    for r in [0.1, 0.5, 0.9] {
        assert_relative_eq!(electric_potential(&mu, &[0.0, r]).unwrap(), (1.0 - r * r) / 2.0, epsilon = 1e-13);
    }

    let ball = DiscreteMeasure::uniform_ball(D3, 1.0, 1.0).unwrap();
    for r in [0.0, 0.3, 0.8] {
        assert_relative_eq!(electric_potential(&ball, &[r, 0.0, 0.0]).unwrap(), (3.0 - r * r) / 2.0, epsilon = 1e-13);
    }
    assert_relative_eq!(electric_potential(&ball, &[0.0, 0.0, 4.0]).unwrap(), 0.25, epsilon = 1e-14);
}

/// Brute-force polar quadrature of ∫ −log|x − y| ρ(|y|) dy in d = 2.
fn brute_potential_2d(profile: &RadialProfile, x: &[f64]) -> f64 {
    let gl = quad::GaussLegendre::new(64);
    let nt = 2048;
    let mut total = 0.0;
    for k in 0..profile.shells() {
        let (a, b) = (profile.edges()[k], profile.edges()[k + 1]);
        let rho = profile.densities()[k];
        for (r, w) in gl.on(a, b) {
            let mut ring = 0.0;
            for j in 0..nt {
                let t = 2.0 * PI * (j as f64 + 0.5) / nt as f64;
                let y = [r * t.cos(), r * t.sin()];
                ring += -0.5 * dist2(x, &y).ln();
            }
            total += w * r * rho * ring * 2.0 * PI / nt as f64;
        }
    }
    total
}

#[test]
fn radial_potential_matches_brute_force() {
    let p = RadialProfile::new(D2, vec![0.0, 0.4, 1.1, 1.5], vec![0.5, 0.2, 0.05]).unwrap();
    let m = DiscreteMeasure::radial(p.clone());
    for x in [[2.3, 0.1], [0.0, 3.0]] {
        let exact = m.potential(&x).unwrap();
        let brute = brute_potential_2d(&p, &x);
        assert!((exact - brute).abs() < 1e-6, "{exact} vs {brute}");
    }
}

#[test]
fn radial_self_energy() {
    // ∫ h dμ = 1/4 for the unit disk and 6/5 for the unit ball.
    assert_relative_eq!(disk_measure().self_energy(), 0.25, epsilon = 1e-13);
    let ball = DiscreteMeasure::uniform_ball(D3, 1.0, 1.0).unwrap();
    assert_relative_eq!(ball.self_energy(), 1.2, epsilon = 1e-13);
    // Splitting the disk into shells changes nothing.
    let p = RadialProfile::new(D2, vec![0.0, 0.3, 0.7, 1.0], vec![1.0 / PI; 3]).unwrap();
    assert_relative_eq!(DiscreteMeasure::radial(p).self_energy(), 0.25, epsilon = 1e-13);
}

#[test]
fn jellium_examples() {
    let mu = disk_measure();
    let empty = Configuration::empty(D2);
    assert_relative_eq!(jellium_energy(&empty, &mu).unwrap(), 0.125, epsilon = 1e-13);

    // Far particles see the background as a point charge at the origin.
    let x1 = [40.0, 0.0];
    let x2 = [0.0, -35.0];
    let c = Configuration::from_points(D2, &[x1, x2]).unwrap();
    let expected = coulomb_kernel(&[40.0, 35.0], D2).unwrap() + 40f64.ln() + 35f64.ln() + 0.125;
    assert_relative_eq!(jellium_energy(&c, &mu).unwrap(), expected, epsilon = 1e-12);
}

#[test]
fn rescaled_measure_scaling() {
    let mu = disk_measure();
    let n = 9.0;
    let mn = mu.rescaled(n);
    assert_relative_eq!(mn.total_mass(), n, epsilon = 1e-12);
    // h_N(x) = N h_1(x/√N) − ½ N log N in d = 2.
    let x = [1.3, 2.2];
    let x1 = [x[0] / 3.0, x[1] / 3.0];
    let lhs = mn.potential(&x).unwrap();
    let rhs = n * mu.potential(&x1).unwrap() - 0.5 * n * n.ln();
    assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
}

#[test]
fn cartesian_potential_of_disk() {
    let grid = CartesianGrid::centered(2, 1.25, 1.0 / 64.0).unwrap();
    let dens: Vec<f64> = (0..grid.len())
        .map(|k| {
            let c = grid.cell_center(k);
            if c[0] * c[0] + c[1] * c[1] < 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let cd = CartesianDensity::new(grid.clone(), dens).unwrap();
    let mass = cd.mass();
    let on_cells = cd.potential_on_cells();
    for probe in [[0.0, 0.0], [0.5, 0.25], [1.2, -0.3]] {
        let k = grid.locate_cell(&probe).unwrap();
        let c = grid.cell_center(k);
        let direct = cd.potential_at(&c);
        assert_relative_eq!(on_cells[k], direct, epsilon = 1e-10);
        // Closed form for a uniform disk of density 1 and radius 1.
        let r = (c[0] * c[0] + c[1] * c[1]).sqrt();
        let exact = if r < 1.0 { PI * (1.0 - r * r) / 2.0 } else { -PI * r.ln() };
        assert!((direct - exact).abs() < 2e-2 * mass, "at {c:?}: {direct} vs {exact}");
    }
}

#[test]
fn green_function_examples() {
    let c2 = [0.0, 0.0];
    for r in [0.1, 0.5, 0.9] {
        assert_relative_eq!(green_function_ball(&c2, 1.0, &c2, &[0.0, r], D2).unwrap(), -r.ln(), epsilon = 1e-14);
    }
    let c3 = [0.0, 0.0, 0.0];
    for r in [0.2, 0.7] {
        assert_relative_eq!(
            green_function_ball(&c3, 1.0, &c3, &[r, 0.0, 0.0], D3).unwrap(),
            1.0 / r - 1.0,
            epsilon = 1e-13
        );
    }
    assert_eq!(green_function_ball(&c2, 1.0, &[0.1, 0.1], &[0.1, 0.1], D2), Err(KernelError::Singular));
    assert!(matches!(
        green_function_ball(&c2, 1.0, &[0.1, 0.1], &[2.0, 0.0], D2),
        Err(KernelError::OutOfDomain { .. })
    ));
}

fn random_in_ball(rng: &mut ChaCha8Rng, c: &[f64], s: f64) -> Vec<f64> {
    loop {
        let u: Vec<f64> = c.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        if u.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            return u.iter().zip(c).map(|(a, b)| b + s * a).collect();
        }
    }
}

#[test]
fn green_function_symmetry_and_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [D2, D3] {
        let c: Vec<f64> = (0..dim.get()).map(|k| 0.3 * k as f64 - 0.2).collect();
        let s = 1.7;
        for _ in 0..500 {
            let x = random_in_ball(&mut rng, &c, s);
            let y = random_in_ball(&mut rng, &c, s);
            let a = green_function_ball(&c, s, &x, &y, dim).unwrap();
            let b = green_function_ball(&c, s, &y, &x, dim).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            assert!(a >= 0.0);
            // Vanishes at the boundary.
            let dir: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a - b).collect();
            let nr = norm(&dir);
            let edge: Vec<f64> = c.iter().zip(&dir).map(|(cc, u)| cc + (1.0 - 1e-6) * s * u / nr).collect();
            if dist2(&x, &edge) > 1e-4 {
                assert!(green_function_ball(&c, s, &x, &edge, dim).unwrap().abs() < 1e-4);
            }
        }
    }
}

#[test]
fn harmonic_nodes() {
    for dim in [D2, D3] {
        let c: Vec<f64> = vec![0.5; dim.get()];
        let nodes = harmonic_measure_nodes(&c, 2.0, dim, 64);
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-13);
        let affine = |y: &[f64]| 1.0 + 2.0 * y[0] - 0.5 * y[1];
        assert_relative_eq!(sphere_average(&nodes, affine), affine(&c), epsilon = 1e-10);
    }
    assert_eq!(harmonic_measure_nodes(&[0.0; 3], 1.0, D3, 512).len(), 512);
}

#[test]
fn mean_value_property() {
    let c = [0.2, -0.1];
    let nodes = harmonic_measure_nodes(&c, 1.0, D2, 256);
    for z in [[1.6, 0.0], [0.0, -1.5], [3.0, 3.0]] {
        let avg = sphere_average(&nodes, |y| coulomb_kernel(&[y[0] - z[0], y[1] - z[1]], D2).unwrap());
        let center = coulomb_kernel(&[c[0] - z[0], c[1] - z[1]], D2).unwrap();
        assert!((avg - center).abs() < 1e-8);
    }
    let c3 = [0.0, 0.1, 0.0];
    let nodes = harmonic_measure_nodes(&c3, 1.0, D3, 512);
    let z = [0.0, 0.0, 2.5];
    let avg = sphere_average(&nodes, |y| 1.0 / dist2(y, &z).sqrt());
    assert!((avg - 1.0 / dist2(&c3, &z).sqrt()).abs() < 1e-8);
}

#[test]
fn poisson_reweight_reproduces_harmonic_functions() {
    let ball = Ball::new(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    let nodes = harmonic_measure_nodes(&ball.center, 1.0, D3, 512);
    let x = [0.2, -0.1, 0.15];
    let w = poisson_reweight(&ball, &x, &nodes, D3).unwrap();
    let total: f64 = w.iter().map(|n| n.weight).sum();
    assert_relative_eq!(total, 1.0, epsilon = 1e-9);
    let z = [0.0, 1.8, 0.0];
    let avg = sphere_average(&w, |y| 1.0 / dist2(y, &z).sqrt());
    assert_relative_eq!(avg, 1.0 / dist2(&x, &z).sqrt(), epsilon = 1e-8);
}

#[test]
fn measure_roundtrip() {
    let m = DiscreteMeasure::radial(RadialProfile::new(D3, vec![0.0, 1.0, 2.0], vec![0.1, 0.02]).unwrap());
    let s = serde_json::to_string(&m).unwrap();
    let back: DiscreteMeasure = serde_json::from_str(&s).unwrap();
    assert_eq!(back.total_mass(), m.total_mass());
}
