use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coulomb_harness::acceptance::{Check, CriterionReport};
use coulomb_harness::commands::{covered_criteria, preset_coverage, VerifyOutcome};
use coulomb_harness::manifest::{RunManifest, MANIFEST_FILE};
use coulomb_harness::spec::ExperimentSpec;
use coulomb_harness::{exit, HarnessError};
use serde_json::json;
use tempfile::TempDir;

const QUADRATIC: &str = r#"{"schemaVersion":1,"kind":"quadratic","parameters":{"coefficient":0.5}}"#;

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn lab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coulomb-lab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("COULOMB_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_path(o: &Output) -> PathBuf {
    PathBuf::from(String::from_utf8_lossy(&o.stdout).lines().last().unwrap_or_default().trim())
}

/// Writes a config plus a quadratic potential into `dir`.
fn write_config(dir: &Path, config: serde_json::Value) -> PathBuf {
    std::fs::write(dir.join("v.json"), QUADRATIC).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn small_mcmc(extra: serde_json::Value) -> serde_json::Value {
    let mut base = json!({
        "schemaVersion": 1,
        "name": "small",
        "potentialFile": "v.json",
        "dims": [2],
        "n": [6],
        "beta": {"theta": 6.0},
        "sampler": {"samples": 200, "burnInSweeps": 50, "thinSweeps": 2}
    });
    for (k, v) in extra.as_object().unwrap() {
        base[k] = v.clone();
    }
    base
}

#[test]
fn malformed_potential_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), small_mcmc(json!({})));
    std::fs::write(tmp.path().join("v.json"), r#"{"kind":"quadratic","parameters":"#).unwrap();
    let o = lab(&["equilibrium"], &config, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential file"));
}

#[test]
fn quadratic_equilibrium_is_closed_form() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), small_mcmc(json!({"thermal": true})));
    let o = lab(&["equilibrium"], &config, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = stdout_path(&o);
    let header = std::fs::read_to_string(dir.join("mu_inf_d2.json")).unwrap();
    assert!(header.contains("closed form"));
    assert!(dir.join("mu_theta_d2_n6.json").is_file());
    let m = RunManifest::load(&dir).unwrap();
    assert_eq!(m.outputs.len(), 4);
}

#[test]
fn quartic_preset_solves_on_a_grid() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["equilibrium"], &presets().join("quartic.json"), tmp.path());
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let header = std::fs::read_to_string(stdout_path(&o).join("mu_inf_d2.json")).unwrap();
    assert!(!header.contains("closed form"));
    assert!(stdout_path(&o).join("mu_theta_d2_n32.bin").is_file());
}

#[test]
fn thermal_init_without_artifact_is_missing() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), small_mcmc(json!({"sampler": {"samples": 10, "init": "thermal"}})));
    let o = lab(&["sample"], &config, &tmp.path().join("out"));
    assert_eq!(code(&o), exit::MISSING_ARTIFACT);
    assert!(!tmp.path().join("out").exists() || std::fs::read_dir(tmp.path().join("out")).unwrap().count() == 0);
}

#[test]
fn thermal_init_after_equilibrium_samples() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config =
        write_config(tmp.path(), small_mcmc(json!({"thermal": true, "sampler": {"samples": 20, "init": "thermal"}})));
    assert_eq!(code(&lab(&["equilibrium"], &config, &out)), exit::OK);
    let o = lab(&["sample"], &config, &out);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn estimate_without_samples_is_missing() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), small_mcmc(json!({"estimators": [{"kind": "extremeRadius"}]})));
    assert_eq!(code(&lab(&["estimate"], &config, &tmp.path().join("out"))), exit::MISSING_ARTIFACT);
}

#[test]
fn empty_sample_file_is_reported() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), small_mcmc(json!({"estimators": [{"kind": "extremeRadius"}]})));
    let o = lab(&["sample"], &config, &out);
    assert_eq!(code(&o), exit::OK);
    std::fs::write(stdout_path(&o).join("samples_d2_n6.clss"), b"").unwrap();
    let o = lab(&["estimate"], &config, &out);
    assert_eq!(code(&o), exit::EMPTY_SAMPLES);
    assert!(String::from_utf8_lossy(&o.stderr).contains("samples_d2_n6.clss"));
}

#[test]
fn rerun_refuses_to_overwrite() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), small_mcmc(json!({})));
    assert_eq!(code(&lab(&["sample"], &config, &out)), exit::OK);
    assert_eq!(code(&lab(&["sample"], &config, &out)), exit::RUN_EXISTS);
    // A different seed is a different run.
    assert_eq!(code(&lab(&["sample", "--seed", "1"], &config, &out)), exit::OK);
}

#[test]
fn same_spec_twice_gives_identical_digests() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        small_mcmc(json!({
            "sampler": {"samples": 200, "chains": 2, "burnInSweeps": 50, "thinSweeps": 2},
            "estimators": [{"kind": "rho1", "bin": 0.5, "halfWidth": 6.0}, {"kind": "extremeRadius"}]
        })),
    );
    let mut manifests = Vec::new();
    let mut names = Vec::new();
    for (i, threads) in ["1", "2"].iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let s = lab(&["sample", "--threads", threads], &config, &out);
        assert_eq!(code(&s), exit::OK);
        let e = lab(&["estimate"], &config, &out);
        assert_eq!(code(&e), exit::OK, "{}", String::from_utf8_lossy(&e.stderr));
        manifests.push((RunManifest::load(&stdout_path(&s)).unwrap(), RunManifest::load(&stdout_path(&e)).unwrap()));
        names.push(stdout_path(&s).file_name().unwrap().to_owned());
    }
    assert_eq!(names[0], names[1]);
    let (a, b) = (&manifests[0], &manifests[1]);
    assert_eq!(a.0.digest(), b.0.digest());
    assert_eq!(a.1.digest(), b.1.digest());
    assert!(a.1.outputs.iter().any(|o| o.path == "index.json"));
}

#[test]
fn dimension_mismatch_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(
        tmp.path(),
        small_mcmc(json!({
            "dims": [3],
            "n": [8],
            "estimators": [{
                "kind": "subharmonicity", "bin": 0.5, "halfWidth": 5.0,
                "balls": [{"center": [4.0, 0.0], "radius": 1.0}]
            }]
        })),
    );
    assert_eq!(code(&lab(&["sample"], &config, &out)), exit::OK);
    let o = lab(&["estimate"], &config, &out);
    assert_eq!(code(&o), exit::CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn verify_only_split() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["verify", "--only", "split"], &presets().join("verify.json"), tmp.path());
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("criterion 1 PASS"));
    assert!(!stdout.contains("criterion 2"));
    let m = RunManifest::load(&stdout_path(&o)).unwrap();
    let names: Vec<&str> = m.outputs.iter().map(|o| o.path.as_str()).collect();
    assert_eq!(names, ["split.json"]);

    let o = lab(&["verify", "--only", "nonsense"], &presets().join("verify.json"), tmp.path());
    assert_eq!(code(&o), exit::CONFIG);
}

#[test]
fn failing_contract_is_named() {
    let report = CriterionReport {
        id: 8,
        name: "extreme".into(),
        passed: false,
        seconds: 0.0,
        checks: vec![Check { label: "centre".into(), passed: Some(false), detail: "off".into() }],
    };
    let outcome = VerifyOutcome { dir: PathBuf::new(), reports: vec![report] };
    let err = outcome.failure().unwrap();
    assert_eq!(err.exit_code(), exit::VERIFY_FAILED);
    assert!(matches!(&err, HarnessError::VerifyFailed { name, .. } if name == "extreme"));
}

#[test]
fn report_lists_missing_items_as_not_run() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(
        tmp.path(),
        small_mcmc(json!({"oracles": ["split", "squeeze"], "estimators": [{"kind": "extremeRadius"}]})),
    );
    let o = lab(&["report"], &config, &out);
    assert_eq!(code(&o), exit::OK);
    let md = std::fs::read_to_string(stdout_path(&o)).unwrap();
    assert_eq!(md.matches("NOT RUN").count(), 3, "{md}");

    assert_eq!(code(&lab(&["verify", "--only", "split"], &config, &out)), exit::OK);
    let o = lab(&["report"], &config, &out);
    let md = std::fs::read_to_string(stdout_path(&o)).unwrap();
    assert!(md.contains("| 1. split |") && md.contains("| PASS |"), "{md}");
    assert_eq!(md.matches("NOT RUN").count(), 2);
    // Same content, same directory.
    let again = lab(&["report"], &config, &out);
    assert_eq!(code(&again), exit::OK);
    assert_eq!(stdout_path(&again), stdout_path(&o));
    assert!(stdout_path(&o).parent().unwrap().join(MANIFEST_FILE).is_file());
}

#[test]
fn acceptance_preset_report_has_every_criterion() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["report"], &presets().join("acceptance.json"), tmp.path());
    assert_eq!(code(&o), exit::OK);
    let md = std::fs::read_to_string(stdout_path(&o)).unwrap();
    for (i, name) in coulomb_harness::acceptance::CONTRACTS.iter().enumerate() {
        assert!(md.contains(&format!("| {}. {name} |", i + 1)), "row {name} missing");
    }
    assert!(!md.contains("No preset covers"));
}

#[test]
fn presets_cover_every_criterion() {
    let covered = preset_coverage(&presets()).unwrap();
    assert_eq!(covered.into_iter().collect::<Vec<_>>(), (1..=10).collect::<Vec<u8>>());
    for name in ["ginibre", "poisson", "quartic", "verify", "acceptance"] {
        let text = std::fs::read_to_string(presets().join(format!("{name}.json"))).unwrap();
        let spec = ExperimentSpec::from_json(&text).unwrap();
        spec.validate().unwrap();
        if name == "acceptance" {
            assert_eq!(covered_criteria(&spec).len(), 10);
        }
    }
}
