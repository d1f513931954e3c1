//! The five CLI commands. Each one reads a loaded config, writes a fresh
//! digest-keyed run directory under the output directory and returns it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use coulomb_equilibrium::{
    load_equilibrium, load_thermal, save_equilibrium, save_thermal, solve_equilibrium, solve_thermal_from,
    EquilibriumData, GridSpec,
};
use coulomb_estimators::{
    confinement_profile, estimate_rho1, extreme_radius, poisson_tests_in_bulk, rider_center, subharmonicity_test,
    vacuum_tail, BinSpec, EstimatorError, Tabular, Window,
};
use coulomb_kernel::SpaceDim;
use coulomb_sampler::{exact_ginibre, rejection_sample_small_n, run_chains, ChainSchedule, GasParams, SampleSet};
use serde::{Deserialize, Serialize};

use crate::acceptance::{run_contract, CriterionReport, DEFAULT_CONTRACTS};
use crate::error::{HarnessError, Result};
use crate::manifest::{
    config_digest, equilibrium_key, missing_or_io, run_dir, run_key, sha256_hex, ParamsRecord, RunDir, RunManifest,
    MANIFEST_FILE, TOOL_VERSION,
};
use crate::spec::{ChainInit, EstimatorRequest, ExperimentSpec, LoadedSpec, SamplerMethod};

/// Options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads for the sampler; outputs do not depend on it.
    pub threads: Option<usize>,
    /// `verify` only: run this contract alone.
    pub only: Option<String>,
}

pub const INDEX_FILE: &str = "index.json";
pub const REPORT_FILE: &str = "report.md";

fn manifest_base(command: &str, loaded: &LoadedSpec, seed: u64) -> RunManifest {
    RunManifest {
        tool_version: TOOL_VERSION.into(),
        command: command.into(),
        config_digest: config_digest(loaded),
        seed,
        params: Vec::new(),
        schedule: None,
        outputs: Vec::new(),
        wall_clock: 0.0,
    }
}

fn stem(d: SpaceDim, n: Option<usize>, prefix: &str) -> String {
    match n {
        Some(n) => format!("{prefix}_d{}_n{n}", d.get()),
        None => format!("{prefix}_d{}", d.get()),
    }
}

pub fn equilibrium_dir(loaded: &LoadedSpec) -> PathBuf {
    run_dir(&loaded.output_dir, "equilibrium", &equilibrium_key(loaded))
}

pub fn sample_dir(loaded: &LoadedSpec, seed: u64) -> PathBuf {
    run_dir(&loaded.output_dir, "sample", &run_key("sample", &config_digest(loaded), seed))
}

fn params_for(loaded: &LoadedSpec, dim: SpaceDim, n: usize) -> Result<GasParams> {
    let beta = loaded.spec.beta(dim, n)?;
    Ok(GasParams::shared(Arc::new(loaded.potential.clone()), dim, n, beta)?)
}

fn record(params: &GasParams, chain_schedule: Option<ChainSchedule>) -> ParamsRecord {
    ParamsRecord {
        dim: params.dim().get(),
        n: params.n,
        beta: params.beta,
        theta: params.theta(),
        params_digest: params.digest(),
        chain_schedule,
    }
}

/// μ∞ from the equilibrium artifacts when present, otherwise solved here.
fn equilibrium_for(loaded: &LoadedSpec, dim: SpaceDim) -> Result<Arc<EquilibriumData>> {
    let stem_path = equilibrium_dir(loaded).join(stem(dim, None, "mu_inf"));
    if stem_path.with_extension("json").is_file() {
        return Ok(Arc::new(load_equilibrium(&stem_path)?));
    }
    Ok(Arc::new(solve_equilibrium(&loaded.potential, dim, &loaded.spec.grid)?))
}

/// Solves μ∞ (and μ_θ per N when requested) and writes the artifacts.
pub fn cmd_equilibrium(loaded: &LoadedSpec, opts: &RunOptions) -> Result<PathBuf> {
    let start = Instant::now();
    let dir = RunDir::create(equilibrium_dir(loaded))?;
    let mut manifest = manifest_base("equilibrium", loaded, opts.seed);
    let mut files = Vec::new();
    for dim in loaded.spec.dims()? {
        let eq = solve_equilibrium(&loaded.potential, dim, &loaded.spec.grid)?;
        log::info!("μ∞ in d = {}: {}", dim.get(), eq.log().method);
        files.extend(save_equilibrium(&eq, &dir.path().join(stem(dim, None, "mu_inf")))?);
        for &n in &loaded.spec.n {
            let params = params_for(loaded, dim, n)?;
            if loaded.spec.thermal {
                let t = solve_thermal_from(&eq, params.theta(), &GridSpec::Auto)?;
                files.extend(save_thermal(&t, &dir.path().join(stem(dim, Some(n), "mu_theta")))?);
            }
            manifest.params.push(record(&params, None));
        }
    }
    manifest.wall_clock = start.elapsed().as_secs_f64();
    let target = dir.target().to_path_buf();
    dir.commit(manifest, &files)?;
    Ok(target)
}

fn chain_schedule(loaded: &LoadedSpec, n: usize) -> ChainSchedule {
    let s = &loaded.spec.sampler;
    let d = ChainSchedule::defaults(n, s.samples);
    ChainSchedule {
        burn_in_sweeps: s.burn_in_sweeps.unwrap_or(d.burn_in_sweeps),
        thin_sweeps: s.thin_sweeps.unwrap_or(d.thin_sweeps),
        samples: s.samples,
    }
}

/// Draws one sample set per (d, N).
pub fn cmd_sample(loaded: &LoadedSpec, opts: &RunOptions) -> Result<PathBuf> {
    let start = Instant::now();
    let sampler = &loaded.spec.sampler;
    // Check every input before any work is done.
    if sampler.init == ChainInit::Thermal {
        for dim in loaded.spec.dims()? {
            for &n in &loaded.spec.n {
                let path = equilibrium_dir(loaded).join(stem(dim, Some(n), "mu_theta")).with_extension("json");
                if !path.is_file() {
                    return Err(HarnessError::MissingArtifact {
                        path,
                        reason: "thermal initialization needs the μ_θ artifact; run `equilibrium` with thermal: true"
                            .into(),
                    });
                }
            }
        }
    }
    let dir = RunDir::create(sample_dir(loaded, opts.seed))?;
    let mut manifest = manifest_base("sample", loaded, opts.seed);
    manifest.schedule = Some(sampler.clone());
    let mut files = Vec::new();
    for dim in loaded.spec.dims()? {
        let eq = equilibrium_for(loaded, dim)?;
        for &n in &loaded.spec.n {
            let mut params = params_for(loaded, dim, n)?.with_equilibrium(eq.clone())?;
            if sampler.init == ChainInit::Thermal {
                let t = load_thermal(&equilibrium_dir(loaded).join(stem(dim, Some(n), "mu_theta")))?;
                params = params.with_thermal(Arc::new(t))?;
            }
            let (set, schedule) = match sampler.method {
                SamplerMethod::Mcmc => {
                    let schedule = chain_schedule(loaded, n);
                    (run_chains(&params, opts.seed, &schedule, sampler.chains, opts.threads)?, Some(schedule))
                }
                SamplerMethod::Exact => (exact_ginibre(&params, opts.seed, sampler.samples)?, None),
                SamplerMethod::Rejection => (rejection_sample_small_n(&params, opts.seed, sampler.samples)?, None),
            };
            let file = PathBuf::from(format!("{}.clss", stem(dim, Some(n), "samples")));
            set.save(&dir.path().join(&file))?;
            files.push(file);
            manifest.params.push(record(&params, schedule));
        }
    }
    manifest.wall_clock = start.elapsed().as_secs_f64();
    let target = dir.target().to_path_buf();
    dir.commit(manifest, &files)?;
    Ok(target)
}

/// One row of an estimate index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexEntry {
    pub kind: String,
    pub dim: usize,
    pub n: usize,
    pub json: String,
    pub csv: String,
    pub summary: String,
    /// Verdict for estimators with a pass/fail reading, else `None`.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateIndex {
    pub config_digest: String,
    pub seed: u64,
    pub entries: Vec<IndexEntry>,
}

fn load_samples(path: &Path) -> Result<SampleSet> {
    let meta = std::fs::metadata(path).map_err(|e| missing_or_io(path, e))?;
    if meta.len() == 0 {
        return Err(HarnessError::EmptySamples(path.to_path_buf()));
    }
    let set = SampleSet::load(path)?;
    if set.is_empty() {
        return Err(HarnessError::EmptySamples(path.to_path_buf()));
    }
    Ok(set)
}

struct Estimated {
    json: String,
    csv: String,
    summary: String,
    passed: Option<bool>,
}

fn estimated<T: Serialize + Tabular>(report: &T, summary: String, passed: Option<bool>) -> Result<Estimated> {
    Ok(Estimated { json: serde_json::to_string_pretty(report)?, csv: report.csv(), summary, passed })
}

fn run_estimator(
    request: &EstimatorRequest,
    samples: &SampleSet,
    eq: &EquilibriumData,
    params: &GasParams,
) -> Result<Estimated> {
    match request {
        EstimatorRequest::Rho1 { bin, half_width } => {
            let r = estimate_rho1(samples, &BinSpec::new(*bin, *half_width))?;
            estimated(&r, format!("∫ρ̂₁ = {:.4}, leakage {:.2e}", r.integral, r.leakage), None)
        }
        EstimatorRequest::Subharmonicity { bin, half_width, balls } => {
            let rho = estimate_rho1(samples, &BinSpec::new(*bin, *half_width))?;
            let balls: Vec<(Vec<f64>, f64)> = balls.iter().map(|b| (b.center.clone(), b.radius)).collect();
            let r = subharmonicity_test(&rho, eq, params, &balls)?;
            let summary = format!("{} violations beyond 3 SE, max z {:.2}", r.violations_beyond_3se, r.max_z);
            estimated(&r, summary, Some(r.violations_beyond_3se == 0))
        }
        EstimatorRequest::Confinement { bin, half_width } => {
            let rho = estimate_rho1(samples, &BinSpec::new(*bin, *half_width))?;
            let r = confinement_profile(&rho, eq, params)?;
            estimated(&r, format!("exterior/interior ratio {:.3} (≤ 3)", r.ratio), Some(r.ratio <= 3.0))
        }
        EstimatorRequest::VacuumTail { gammas } => {
            let r = vacuum_tail(samples, eq, params, gammas)?;
            estimated(&r, format!("fitted C {:.4}", r.fitted_c), None)
        }
        EstimatorRequest::ExtremeRadius => {
            let r = extreme_radius(samples)?;
            let summary = format!(
                "mean max|x| {:.4} ± {:.4} (centre {:.4}), fitted C {:.4}, curve below bound: {}",
                r.mean,
                r.std_error,
                rider_center(samples.n()),
                r.fitted_c,
                r.curve_below_bound
            );
            estimated(&r, summary, Some(r.curve_below_bound))
        }
        EstimatorRequest::Poisson { centers, side } => {
            if let Some(c) = centers.iter().find(|c| c.len() != samples.dim().get()) {
                return Err(EstimatorError::DimensionMismatch { samples: samples.dim().get(), request: c.len() }.into());
            }
            let windows: Vec<Window> = centers.iter().map(|c| Window::cube(c, *side)).collect();
            let r = poisson_tests_in_bulk(samples, eq, params, &windows)?;
            let (lo, hi) =
                r.windows.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), w| (a.min(w.dispersion), b.max(w.dispersion)));
            let tv = r.windows.iter().map(|w| w.tv_distance).fold(0.0, f64::max);
            let ok = lo >= 0.85 && hi <= 1.15 && tv < 0.1 && r.rho1_flatness < 1.2;
            let summary = format!("dispersion [{lo:.3}, {hi:.3}], max TV {tv:.4}, flatness {:.3}", r.rho1_flatness);
            estimated(&r, summary, Some(ok))
        }
    }
}

/// Runs every requested estimator on the sample sets of `sample` for the
/// same config and seed.
pub fn cmd_estimate(loaded: &LoadedSpec, opts: &RunOptions) -> Result<PathBuf> {
    let start = Instant::now();
    let samples_dir = sample_dir(loaded, opts.seed);
    if !samples_dir.join(MANIFEST_FILE).is_file() {
        return Err(HarnessError::MissingArtifact {
            path: samples_dir,
            reason: "no sample run for this config and seed; run `sample` first".into(),
        });
    }
    let digest = config_digest(loaded);
    let key = run_key("estimate", &digest, opts.seed);
    // Load and check all inputs before creating the run directory.
    let mut inputs = Vec::new();
    for dim in loaded.spec.dims()? {
        for &n in &loaded.spec.n {
            let set = load_samples(&samples_dir.join(format!("{}.clss", stem(dim, Some(n), "samples"))))?;
            inputs.push((dim, n, set));
        }
    }
    let dir = RunDir::create(run_dir(&loaded.output_dir, "estimate", &key))?;
    let mut manifest = manifest_base("estimate", loaded, opts.seed);
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (dim, n, set) in &inputs {
        let eq = equilibrium_for(loaded, *dim)?;
        let params = params_for(loaded, *dim, *n)?.with_equilibrium(eq.clone())?;
        if set.header.params_digest != params.digest() && !set.header.params_digest.is_empty() {
            log::warn!("samples for d = {}, N = {n} were drawn for different parameters", dim.get());
        }
        for request in &loaded.spec.estimators {
            let out = run_estimator(request, set, &eq, &params)?;
            let base = format!("{}_{}", request.kind(), stem(*dim, Some(*n), "").trim_start_matches('_'));
            let (json, csv) = (format!("{base}.json"), format!("{base}.csv"));
            for (name, body) in [(&json, &out.json), (&csv, &out.csv)] {
                let path = dir.path().join(name);
                std::fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
                files.push(PathBuf::from(name));
            }
            entries.push(IndexEntry {
                kind: request.kind().into(),
                dim: dim.get(),
                n: *n,
                json,
                csv,
                summary: out.summary,
                passed: out.passed,
            });
        }
        manifest.params.push(record(&params, None));
    }
    let index = EstimateIndex { config_digest: digest, seed: opts.seed, entries };
    let path = dir.path().join(INDEX_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&index)?).map_err(|e| HarnessError::io(&path, e))?;
    files.push(PathBuf::from(INDEX_FILE));
    manifest.wall_clock = start.elapsed().as_secs_f64();
    let target = dir.target().to_path_buf();
    dir.commit(manifest, &files)?;
    Ok(target)
}

/// Result of `verify`: the run directory and one report per contract.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub dir: PathBuf,
    pub reports: Vec<CriterionReport>,
}

impl VerifyOutcome {
    /// The first failing contract with its first failing check.
    pub fn failure(&self) -> Option<HarnessError> {
        self.reports.iter().find(|r| !r.passed).map(|r| HarnessError::VerifyFailed {
            name: crate::acceptance::CONTRACTS[r.id as usize - 1].into(),
            detail: r
                .first_failure()
                .map(|c| format!("{}: {}", c.label, c.detail))
                .unwrap_or_else(|| "no detail".into()),
        })
    }
}

/// Contracts named by `--only`, the config, or the default suite.
pub fn contracts_for(loaded: &LoadedSpec, only: Option<&str>) -> Result<Vec<String>> {
    if let Some(name) = only {
        if crate::acceptance::contract_id(name).is_none() {
            return Err(HarnessError::Config(format!(
                "unknown contract '{name}'; known: {}",
                crate::acceptance::CONTRACTS.join(", ")
            )));
        }
        return Ok(vec![name.to_string()]);
    }
    if loaded.spec.oracles.is_empty() {
        return Ok(DEFAULT_CONTRACTS.iter().map(|s| s.to_string()).collect());
    }
    Ok(loaded.spec.oracles.clone())
}

/// Runs the identity and inequality contracts. Reports are written even
/// when a contract fails; the caller turns `failure` into an exit code.
pub fn cmd_verify(loaded: &LoadedSpec, opts: &RunOptions) -> Result<VerifyOutcome> {
    let start = Instant::now();
    let contracts = contracts_for(loaded, opts.only.as_deref())?;
    let digest = config_digest(loaded);
    let key = run_key(&format!("verify:{}", contracts.join(",")), &digest, opts.seed);
    let dir = RunDir::create(run_dir(&loaded.output_dir, "verify", &key))?;
    let mut manifest = manifest_base("verify", loaded, opts.seed);
    let mut files = Vec::new();
    let mut reports = Vec::new();
    for name in &contracts {
        let mut report = run_contract(name)?;
        // Timing varies between runs; keep the written report reproducible.
        let seconds = report.seconds;
        report.seconds = 0.0;
        let file = PathBuf::from(format!("{name}.json"));
        let path = dir.path().join(&file);
        std::fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(|e| HarnessError::io(&path, e))?;
        files.push(file);
        report.seconds = seconds;
        reports.push(report);
    }
    manifest.wall_clock = start.elapsed().as_secs_f64();
    let target = dir.target().to_path_buf();
    dir.commit(manifest, &files)?;
    Ok(VerifyOutcome { dir: target, reports })
}

/// What each contract and estimator is evidence for.
fn statement(name: &str) -> &'static str {
    match name {
        "split" => "energy splitting H = E + F + Σζ and its thermal form",
        "iso" => "isotropic averaging of the jellium energy; adjoint relation",
        "obstacle" => "obstacle solve recovers the quadratic droplet",
        "thermal" => "μ_θ solves its defining relation and approaches μ∞",
        "inequalities" => "one-point mean-value and k-point comparison inequalities",
        "subharmonic" | "subharmonicity" => "e^{βζ}ρ₁ is subharmonic outside the droplet",
        "confinement" => "ρ₁e^{βζ} outside the droplet is bounded by the bulk density",
        "vacuumTail" => "probability of particles far outside decays like e^{−βγ}",
        "extreme" | "extremeRadius" => "extreme radius: exceedance curve below C e^{−t}",
        "poisson" => "window counts at high temperature are Poisson",
        "squeeze" => "squeezing bound with an O(1) constant",
        "rho1" => "one-point function estimate",
        _ => "",
    }
}

/// Acceptance criteria (1 to 10) exercised by a config, through its
/// contracts or its estimators.
pub fn covered_criteria(spec: &ExperimentSpec) -> BTreeSet<u8> {
    let mut ids: BTreeSet<u8> = spec.oracles.iter().filter_map(|o| crate::acceptance::contract_id(o)).collect();
    for e in &spec.estimators {
        ids.extend(match e {
            EstimatorRequest::Subharmonicity { .. } => Some(6),
            EstimatorRequest::Confinement { .. } | EstimatorRequest::VacuumTail { .. } => Some(7),
            EstimatorRequest::ExtremeRadius => Some(8),
            EstimatorRequest::Poisson { .. } => Some(9),
            EstimatorRequest::Rho1 { .. } => None,
        });
    }
    ids
}

/// Union of `covered_criteria` over every config in `dir`. Files that are
/// not experiment configs are skipped.
pub fn preset_coverage(dir: &Path) -> Result<BTreeSet<u8>> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut ids = BTreeSet::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
            if let Ok(spec) = ExperimentSpec::from_json(&text) {
                ids.extend(covered_criteria(&spec));
            }
        }
    }
    Ok(ids)
}

/// Manifests in `output` whose command, config digest and seed match.
fn matching_runs(output: &Path, command: &str, digest: &str, seed: u64) -> Vec<PathBuf> {
    let Ok(entries) = std::fs::read_dir(output) else {
        return Vec::new();
    };
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().starts_with(&format!("{command}-"))))
        .filter(|p| {
            RunManifest::load(p).is_ok_and(|m| m.command == command && m.config_digest == digest && m.seed == seed)
        })
        .collect();
    dirs.sort();
    dirs
}

/// Markdown summary of everything the config asks for. Items without a
/// report are listed as NOT RUN.
pub fn render_report(loaded: &LoadedSpec, seed: u64) -> Result<String> {
    let digest = config_digest(loaded);
    let out = &loaded.output_dir;
    let mut md =
        format!("# {}\n\nconfig digest `{}` · seed {seed} · tool {TOOL_VERSION}\n\n", loaded.spec.name, &digest[..16]);

    md += "## Contracts\n\n| contract | statement | outcome | detail |\n|---|---|---|---|\n";
    let mut verified: Vec<(String, CriterionReport, PathBuf)> = Vec::new();
    for dir in matching_runs(out, "verify", &digest, seed) {
        for m in RunManifest::load(&dir)?.outputs {
            let path = dir.join(&m.path);
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
            let report: CriterionReport = serde_json::from_str(&text)?;
            verified.push((m.path.trim_end_matches(".json").to_string(), report, path));
        }
    }
    let contracts = if loaded.spec.oracles.is_empty() {
        DEFAULT_CONTRACTS.iter().map(|s| s.to_string()).collect()
    } else {
        loaded.spec.oracles.clone()
    };
    for name in &contracts {
        let id = crate::acceptance::contract_id(name).unwrap_or(0);
        match verified.iter().rev().find(|(n, _, _)| n == name) {
            Some((_, r, path)) => {
                let detail = r
                    .first_failure()
                    .map(|c| format!("{}: {}", c.label, c.detail))
                    .unwrap_or_else(|| format!("{} checks", r.checks.len()));
                md += &format!(
                    "| {id}. {name} | {} | {} | {} ([json]({})) |\n",
                    statement(name),
                    if r.passed { "PASS" } else { "FAIL" },
                    detail.replace('|', "\\|"),
                    path.strip_prefix(out).unwrap_or(path).display()
                );
            }
            None => md += &format!("| {id}. {name} | {} | NOT RUN | |\n", statement(name)),
        }
    }

    if !loaded.spec.estimators.is_empty() {
        md += "\n## Estimators\n\n| estimator | d | N | statement | outcome | summary | csv |\n|---|---|---|---|---|---|---|\n";
        let mut index: Vec<(PathBuf, IndexEntry)> = Vec::new();
        for dir in matching_runs(out, "estimate", &digest, seed) {
            let path = dir.join(INDEX_FILE);
            if let Ok(text) = std::fs::read_to_string(&path) {
                let idx: EstimateIndex = serde_json::from_str(&text)?;
                index.extend(idx.entries.into_iter().map(|e| (dir.clone(), e)));
            }
        }
        for dim in loaded.spec.dims()? {
            for &n in &loaded.spec.n {
                for request in &loaded.spec.estimators {
                    let kind = request.kind();
                    let found = index.iter().rev().find(|(_, e)| e.kind == kind && e.dim == dim.get() && e.n == n);
                    match found {
                        Some((dir, e)) => {
                            let outcome = match e.passed {
                                Some(true) => "PASS",
                                Some(false) => "FAIL",
                                None => "reported",
                            };
                            let csv = dir.join(&e.csv);
                            md += &format!(
                                "| {kind} | {} | {n} | {} | {outcome} | {} | [csv]({}) |\n",
                                dim.get(),
                                statement(kind),
                                e.summary.replace('|', "\\|"),
                                csv.strip_prefix(out).unwrap_or(&csv).display()
                            );
                        }
                        None => {
                            md += &format!("| {kind} | {} | {n} | {} | NOT RUN | | |\n", dim.get(), statement(kind))
                        }
                    }
                }
            }
        }
    }

    let this = covered_criteria(&loaded.spec);
    let presets = loaded.config_dir.as_deref().map(preset_coverage).transpose()?.unwrap_or_default();
    md += "\n## Acceptance coverage\n\n| criterion | this config | presets in config directory |\n|---|---|---|\n";
    for (i, name) in crate::acceptance::CONTRACTS.iter().enumerate() {
        let id = i as u8 + 1;
        let mark = |set: &BTreeSet<u8>| if set.contains(&id) { "yes" } else { "no" };
        md += &format!("| {id}. {name} | {} | {} |\n", mark(&this), mark(&presets));
    }
    let missing: Vec<String> = (1..=10u8).filter(|i| !presets.contains(i)).map(|i| i.to_string()).collect();
    if !missing.is_empty() {
        md += &format!("\nNo preset covers criteria {}.\n", missing.join(", "));
    }
    Ok(md)
}

/// Writes `render_report` into a directory keyed by the report's content,
/// so an unchanged report is never written twice.
pub fn cmd_report(loaded: &LoadedSpec, opts: &RunOptions) -> Result<PathBuf> {
    let start = Instant::now();
    let md = render_report(loaded, opts.seed)?;
    let target = run_dir(&loaded.output_dir, "report", &sha256_hex(md.as_bytes())[..16]);
    if target.join(REPORT_FILE).is_file() {
        return Ok(target);
    }
    let dir = RunDir::create(target.clone())?;
    let path = dir.path().join(REPORT_FILE);
    std::fs::write(&path, &md).map_err(|e| HarnessError::io(&path, e))?;
    let mut manifest = manifest_base("report", loaded, opts.seed);
    manifest.wall_clock = start.elapsed().as_secs_f64();
    dir.commit(manifest, &[PathBuf::from(REPORT_FILE)])?;
    Ok(target)
}
