//! One test per acceptance criterion. Each prints a PASS/FAIL line followed
//! by its sub-checks and fails when any sub-check misses its tolerance.

use coulomb_harness::acceptance::run_criterion;

fn criterion(id: u8) {
    let report = run_criterion(id).unwrap_or_else(|e| panic!("criterion {id} could not run: {e}"));
    for line in report.lines() {
        println!("{line}");
    }
    if let Some(c) = report.first_failure() {
        panic!("criterion {id} FAIL: {}: {}", c.label, c.detail);
    }
}

#[test]
fn criterion_01_splitting_identities() {
    criterion(1);
}

#[test]
fn criterion_02_isotropic_averaging() {
    criterion(2);
}

#[test]
fn criterion_03_obstacle_solver() {
    criterion(3);
}

#[test]
fn criterion_04_thermal_equilibrium() {
    criterion(4);
}

#[test]
fn criterion_05_oracle_inequalities() {
    criterion(5);
}

#[test]
fn criterion_06_subharmonicity() {
    criterion(6);
}

#[test]
fn criterion_07_confinement() {
    criterion(7);
}

#[test]
fn criterion_08_ginibre_extreme_radius() {
    criterion(8);
}

#[test]
fn criterion_09_high_temperature_poisson() {
    criterion(9);
}

#[test]
fn criterion_10_squeeze() {
    criterion(10);
}
