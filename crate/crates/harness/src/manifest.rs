//! Run manifests and digest-keyed run directories.

use std::path::{Path, PathBuf};

use coulomb_sampler::ChainSchedule;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::spec::{LoadedSpec, SamplerRequest};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

/// Hex digits of a digest used in directory names.
const KEY_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamsRecord {
    pub dim: usize,
    pub n: usize,
    pub beta: f64,
    pub theta: f64,
    pub params_digest: String,
    /// Resolved chain schedule for MCMC runs.
    pub chain_schedule: Option<ChainSchedule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutputRecord {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub params: Vec<ParamsRecord>,
    pub schedule: Option<SamplerRequest>,
    pub outputs: Vec<OutputRecord>,
    /// Seconds; the only field excluded from `digest`.
    pub wall_clock: f64,
}

impl RunManifest {
    /// SHA-256 over every field except the wall clock.
    pub fn digest(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock = 0.0;
        sha256_hex(serde_json::to_string(&copy).expect("manifest serializes").as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| missing_or_io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub(crate) fn missing_or_io(path: &Path, e: std::io::Error) -> HarnessError {
    if e.kind() == std::io::ErrorKind::NotFound {
        HarnessError::MissingArtifact { path: path.to_path_buf(), reason: "not found".into() }
    } else {
        HarnessError::io(path, e)
    }
}

/// Digest of the parsed config and the potential file contents. The
/// output directory is not part of it.
pub fn config_digest(loaded: &LoadedSpec) -> String {
    let mut spec = loaded.spec.clone();
    spec.output_dir = PathBuf::new();
    let mut h = Sha256::new();
    h.update(serde_json::to_string(&spec).expect("config serializes").as_bytes());
    h.update(&loaded.potential_bytes);
    hex::encode(h.finalize())
}

/// Key of the equilibrium artifacts: only the inputs of the solves.
pub fn equilibrium_key(loaded: &LoadedSpec) -> String {
    let s = &loaded.spec;
    let mut h = Sha256::new();
    h.update(&loaded.potential_bytes);
    h.update(serde_json::to_string(&(&s.dims, &s.n, &s.beta, &s.grid, s.thermal)).expect("serializes").as_bytes());
    hex::encode(h.finalize())[..KEY_LEN].to_string()
}

/// Key of a command run: tool version, command, config digest and seed.
pub fn run_key(command: &str, config_digest: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(TOOL_VERSION.as_bytes());
    h.update(command.as_bytes());
    h.update(config_digest.as_bytes());
    h.update(seed.to_le_bytes());
    hex::encode(h.finalize())[..KEY_LEN].to_string()
}

pub fn run_dir(output: &Path, command: &str, key: &str) -> PathBuf {
    output.join(format!("{command}-{key}"))
}

/// A run directory being written. Files go to a staging directory that is
/// renamed into place by `commit`; an abandoned stage is removed on drop.
#[derive(Debug)]
pub struct RunDir {
    target: PathBuf,
    stage: PathBuf,
    committed: bool,
}

impl RunDir {
    /// Fails with RunExists if `target` is already there.
    pub fn create(target: PathBuf) -> Result<Self> {
        if target.exists() {
            return Err(HarnessError::RunExists(target));
        }
        let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let stage = target.with_file_name(format!(".{name}.partial-{}", std::process::id()));
        if stage.exists() {
            std::fs::remove_dir_all(&stage).map_err(|e| HarnessError::io(&stage, e))?;
        }
        std::fs::create_dir_all(&stage).map_err(|e| HarnessError::io(&stage, e))?;
        Ok(RunDir { target, stage, committed: false })
    }

    /// Where files are written until `commit`.
    pub fn path(&self) -> &Path {
        &self.stage
    }

    pub fn target(&self) -> &Path {
        &self.target
    }

    /// Writes the manifest and moves the directory into place.
    pub fn commit(mut self, manifest: RunManifest, files: &[PathBuf]) -> Result<RunManifest> {
        let manifest = write_manifest(&self.stage, manifest, files)?;
        if self.target.exists() {
            return Err(HarnessError::RunExists(self.target.clone()));
        }
        std::fs::rename(&self.stage, &self.target).map_err(|e| HarnessError::io(&self.target, e))?;
        self.committed = true;
        Ok(manifest)
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = std::fs::remove_dir_all(&self.stage);
        }
    }
}

/// Records digests for `files` (relative to `dir`) and writes the manifest.
fn write_manifest(dir: &Path, mut manifest: RunManifest, files: &[PathBuf]) -> Result<RunManifest> {
    let mut outputs = Vec::with_capacity(files.len());
    for f in files {
        let full = if f.is_absolute() { f.clone() } else { dir.join(f) };
        let rel = full.strip_prefix(dir).unwrap_or(&full).to_string_lossy().replace('\\', "/");
        outputs.push(OutputRecord { path: rel, sha256: file_digest(&full)? });
    }
    outputs.sort_by(|a, b| a.path.cmp(&b.path));
    manifest.outputs = outputs;
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(manifest)
}
