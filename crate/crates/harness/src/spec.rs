//! Versioned JSON experiment configs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use coulomb_equilibrium::GridSpec;
use coulomb_kernel::SpaceDim;
use coulomb_potential::{PotentialSpec, TemperatureSchedule};
use serde::{Deserialize, Serialize};

use crate::acceptance::contract_id;
use crate::error::{HarnessError, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// β_N for every N in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BetaSchedule {
    /// The same β for every N.
    Constant(f64),
    /// β_N = θ N^{−2/d}.
    Theta(f64),
    /// Explicit β per N; keys are N.
    Table(BTreeMap<usize, f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SamplerMethod {
    #[default]
    Mcmc,
    /// Exact Ginibre sampling (d = 2, V₁ = |x|²/2, β = 2).
    Exact,
    /// Rejection sampling, N ≤ 3.
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ChainInit {
    /// Uniform on a box around the droplet.
    #[default]
    Uniform,
    /// i.i.d. draws from μ_θ; needs the thermal artifacts of `equilibrium`.
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SamplerRequest {
    #[serde(default)]
    pub method: SamplerMethod,
    pub samples: usize,
    #[serde(default = "one")]
    pub chains: usize,
    /// Defaults to 200·N.
    #[serde(default)]
    pub burn_in_sweeps: Option<usize>,
    /// Defaults to N.
    #[serde(default)]
    pub thin_sweeps: Option<usize>,
    #[serde(default)]
    pub init: ChainInit,
}

fn one() -> usize {
    1
}

impl Default for SamplerRequest {
    fn default() -> Self {
        SamplerRequest {
            method: SamplerMethod::Mcmc,
            samples: 1000,
            chains: 1,
            burn_in_sweeps: None,
            thin_sweeps: None,
            init: ChainInit::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BallRequest {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// One estimator report to produce for every sample set of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum EstimatorRequest {
    #[serde(rename_all = "camelCase")]
    Rho1 {
        bin: f64,
        half_width: f64,
    },
    #[serde(rename_all = "camelCase")]
    Subharmonicity {
        bin: f64,
        half_width: f64,
        balls: Vec<BallRequest>,
    },
    #[serde(rename_all = "camelCase")]
    Confinement {
        bin: f64,
        half_width: f64,
    },
    #[serde(rename_all = "camelCase")]
    VacuumTail {
        gammas: Vec<f64>,
    },
    ExtremeRadius,
    /// Unit cubes (side `side`) centred at `centers`, all in the bulk.
    #[serde(rename_all = "camelCase")]
    Poisson {
        centers: Vec<Vec<f64>>,
        side: f64,
    },
}

impl EstimatorRequest {
    pub fn kind(&self) -> &'static str {
        match self {
            EstimatorRequest::Rho1 { .. } => "rho1",
            EstimatorRequest::Subharmonicity { .. } => "subharmonicity",
            EstimatorRequest::Confinement { .. } => "confinement",
            EstimatorRequest::VacuumTail { .. } => "vacuumTail",
            EstimatorRequest::ExtremeRadius => "extremeRadius",
            EstimatorRequest::Poisson { .. } => "poisson",
        }
    }

    /// Requests whose statement assumes θ > 2.
    pub fn needs_confinement(&self) -> bool {
        matches!(
            self,
            EstimatorRequest::Subharmonicity { .. }
                | EstimatorRequest::Confinement { .. }
                | EstimatorRequest::VacuumTail { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    pub name: String,
    /// Relative paths are taken from the config file's directory.
    pub potential_file: PathBuf,
    pub dims: Vec<usize>,
    pub n: Vec<usize>,
    pub beta: BetaSchedule,
    #[serde(default)]
    pub grid: GridSpec,
    /// Also solve μ_θ for every (d, N).
    #[serde(default)]
    pub thermal: bool,
    #[serde(default)]
    pub sampler: SamplerRequest,
    #[serde(default)]
    pub estimators: Vec<EstimatorRequest>,
    /// Contract names for `verify`; empty means the default suite.
    #[serde(default)]
    pub oracles: Vec<String>,
    /// Relative paths are taken from the config file's directory.
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

/// A parsed config with its paths resolved and its potential loaded.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: ExperimentSpec,
    pub potential_path: PathBuf,
    pub potential: PotentialSpec,
    /// Raw bytes of the potential file, for digests.
    pub potential_bytes: Vec<u8>,
    pub output_dir: PathBuf,
    /// Directory of the config file.
    pub config_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("config does not parse: {e}")))?;
        if spec.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "schemaVersion {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                spec.schema_version
            )));
        }
        Ok(spec)
    }

    pub fn dims(&self) -> Result<Vec<SpaceDim>> {
        self.dims.iter().map(|&d| SpaceDim::new(d).map_err(|e| HarnessError::Config(e.to_string()))).collect()
    }

    /// The β schedule in dimension `dim`, not checked for θ > 2.
    pub fn schedule(&self, dim: SpaceDim) -> Result<TemperatureSchedule> {
        let map: BTreeMap<usize, f64> = match &self.beta {
            BetaSchedule::Constant(b) => self.n.iter().map(|&n| (n, *b)).collect(),
            BetaSchedule::Theta(t) => self.n.iter().map(|&n| (n, t / (n as f64).powf(dim.two_over_d()))).collect(),
            BetaSchedule::Table(t) => {
                let mut map = BTreeMap::new();
                for &n in &self.n {
                    let b = t
                        .get(&n)
                        .ok_or_else(|| HarnessError::Config(format!("beta table has no entry for N = {n}")))?;
                    map.insert(n, *b);
                }
                map
            }
        };
        Ok(TemperatureSchedule::unchecked(dim, map))
    }

    pub fn beta(&self, dim: SpaceDim, n: usize) -> Result<f64> {
        self.schedule(dim)?.beta(n).ok_or_else(|| HarnessError::Config(format!("no β for N = {n}")))
    }

    pub fn needs_confinement(&self) -> bool {
        self.estimators.iter().any(EstimatorRequest::needs_confinement)
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return bad(format!("name '{}' must be non-empty ASCII letters, digits, '-' or '_'", self.name));
        }
        if self.dims.is_empty() || self.n.is_empty() {
            return bad("dims and n must be non-empty".into());
        }
        if self.n.contains(&0) {
            return bad("N must be ≥ 1".into());
        }
        if self.sampler.samples == 0 || self.sampler.chains == 0 {
            return bad("sampler.samples and sampler.chains must be ≥ 1".into());
        }
        for o in &self.oracles {
            if contract_id(o).is_none() {
                return bad(format!("unknown oracle contract '{o}'"));
            }
        }
        for dim in self.dims()? {
            let schedule = self.schedule(dim)?;
            for (&n, &b) in &schedule.beta_of_n {
                if !(b >= 0.0 && b.is_finite()) {
                    return bad(format!("β = {b} at N = {n}"));
                }
            }
            if self.needs_confinement() {
                schedule.check().map_err(|e| {
                    HarnessError::Config(format!("confinement estimators need θ_N > 2 in d = {}: {e}", dim.get()))
                })?;
            }
        }
        for e in &self.estimators {
            let positive = match e {
                EstimatorRequest::Rho1 { bin, half_width }
                | EstimatorRequest::Subharmonicity { bin, half_width, .. }
                | EstimatorRequest::Confinement { bin, half_width } => *bin > 0.0 && *half_width > *bin,
                EstimatorRequest::VacuumTail { gammas } => !gammas.is_empty(),
                EstimatorRequest::ExtremeRadius => true,
                EstimatorRequest::Poisson { centers, side } => !centers.is_empty() && *side > 0.0,
            };
            if !positive {
                return bad(format!("estimator {} has empty or non-positive parameters", e.kind()));
            }
        }
        Ok(())
    }
}

impl LoadedSpec {
    /// Reads and validates a config; `out` overrides its output directory.
    pub fn load(path: &Path, out: Option<&Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => HarnessError::Config(format!("config {} does not exist", path.display())),
            _ => HarnessError::io(path, e),
        })?;
        let spec = ExperimentSpec::from_json(&text)?;
        spec.validate()?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let potential_path = base.join(&spec.potential_file);
        if !potential_path.is_file() {
            return Err(HarnessError::Config(format!("potential file {} does not exist", potential_path.display())));
        }
        let potential_bytes = std::fs::read(&potential_path).map_err(|e| HarnessError::io(&potential_path, e))?;
        let potential = PotentialSpec::from_json(&String::from_utf8_lossy(&potential_bytes))
            .map_err(|e| HarnessError::Config(format!("potential file {}: {e}", potential_path.display())))?;
        for dim in spec.dims()? {
            potential.check_dim(dim).map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        let output_dir = match out {
            Some(o) => o.to_path_buf(),
            None => base.join(&spec.output_dir),
        };
        Ok(LoadedSpec {
            spec,
            potential_path,
            potential,
            potential_bytes,
            output_dir,
            config_dir: Some(base.to_path_buf()),
        })
    }
}
