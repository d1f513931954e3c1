//! SampleSet container and its file format.
//!
//! Layout: the magic bytes `CLSS`, a `u32` format version, a `u64` header
//! length, the JSON header, then `samples × N × d` little-endian `f64`
//! coordinates, row-major per sample.

use std::io::{Read, Write};
use std::path::Path;

use coulomb_kernel::{Configuration, SpaceDim};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SamplerError};

pub const SAMPLE_MAGIC: &[u8; 4] = b"CLSS";
pub const SAMPLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainSchedule {
    pub burn_in_sweeps: usize,
    pub thin_sweeps: usize,
    pub samples: usize,
}

impl ChainSchedule {
    /// Burn-in 200·N sweeps, N sweeps between samples.
    pub fn defaults(n: usize, samples: usize) -> Self {
        ChainSchedule { burn_in_sweeps: 200 * n, thin_sweeps: n, samples }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Mcmc,
    Rejection,
    ExactGinibre,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainSummary {
    pub chain: u64,
    pub samples: usize,
    pub acceptance: f64,
    /// Integrated autocorrelation time of the energy, in samples.
    pub autocorrelation: f64,
    pub step_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleHeader {
    pub version: u32,
    pub source: SampleSource,
    pub params_digest: String,
    pub seed: u64,
    pub n: usize,
    pub dim: SpaceDim,
    pub beta: f64,
    pub schedule: Option<ChainSchedule>,
    /// Accepted fraction: MH moves for chains, envelope draws for rejection.
    pub acceptance: f64,
    /// Largest per-chain energy autocorrelation time.
    pub autocorrelation: f64,
    pub chains: Vec<ChainSummary>,
}

/// Configurations stored contiguously, chain by chain in chain-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub header: SampleHeader,
    positions: Vec<f64>,
}

impl SampleSet {
    pub fn new(header: SampleHeader, positions: Vec<f64>) -> Result<Self> {
        let row = header.n * header.dim.get();
        if row == 0 || !positions.len().is_multiple_of(row) {
            return Err(SamplerError::Format(format!(
                "{} coordinates do not split into samples of {row}",
                positions.len()
            )));
        }
        Ok(SampleSet { header, positions })
    }

    pub fn n(&self) -> usize {
        self.header.n
    }

    pub fn dim(&self) -> SpaceDim {
        self.header.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len() / (self.header.n * self.header.dim.get())
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Flat coordinates of sample `k`.
    pub fn sample(&self, k: usize) -> &[f64] {
        let row = self.header.n * self.header.dim.get();
        &self.positions[k * row..(k + 1) * row]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.header.n * self.header.dim.get())
    }

    /// Every particle position of every sample.
    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.header.dim.get())
    }

    pub fn configuration(&self, k: usize) -> Result<Configuration> {
        Ok(Configuration::from_flat(self.dim(), self.sample(k).to_vec())?)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Concatenates sets of the same gas, ordered by chain id whatever the
    /// input order. Chain ids must be distinct.
    pub fn merge(mut sets: Vec<SampleSet>) -> Result<SampleSet> {
        if sets.is_empty() {
            return Err(SamplerError::InvalidParams("nothing to merge".into()));
        }
        sets.sort_by_key(|s| s.header.chains.first().map_or(0, |c| c.chain));
        let first = sets[0].header.clone();
        let mut chains = Vec::new();
        let mut positions = Vec::new();
        let mut accepted = 0.0;
        let mut total = 0.0;
        for s in sets {
            if s.header.params_digest != first.params_digest || s.header.seed != first.seed {
                return Err(SamplerError::InvalidParams("merging sample sets of different runs".into()));
            }
            let w = s.len().max(1) as f64;
            accepted += s.header.acceptance * w;
            total += w;
            chains.extend(s.header.chains.iter().cloned());
            positions.extend_from_slice(&s.positions);
        }
        chains.sort_by_key(|c| c.chain);
        if chains.windows(2).any(|w| w[0].chain == w[1].chain) {
            return Err(SamplerError::InvalidParams("duplicate chain id".into()));
        }
        let header = SampleHeader {
            acceptance: accepted / total,
            autocorrelation: chains.iter().map(|c| c.autocorrelation).fold(first.autocorrelation, f64::max),
            chains,
            ..first
        };
        SampleSet::new(header, positions)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let json = serde_json::to_vec(&self.header)?;
        w.write_all(SAMPLE_MAGIC)?;
        w.write_all(&SAMPLE_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.positions.len() * 8);
        for v in &self.positions {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<SampleSet> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| SamplerError::Format("truncated file".into()))?;
        if &magic != SAMPLE_MAGIC {
            return Err(SamplerError::Format("bad magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != SAMPLE_FORMAT_VERSION {
            return Err(SamplerError::Format(format!("unsupported version {version}")));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut json).map_err(|_| SamplerError::Format("truncated header".into()))?;
        let header: SampleHeader = serde_json::from_slice(&json)?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if rest.len() % 8 != 0 {
            return Err(SamplerError::Format("trailing bytes".into()));
        }
        let positions = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        SampleSet::new(header, positions)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SampleSet> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}
