//! Equilibrium artifacts: `<stem>.json` holds the grid layout, constants,
//! potential and solver log; `<stem>.bin` holds little-endian f64 arrays,
//! first the density per cell/shell, then ζ₁ (μ∞) or log μ_θ,1 (μ_θ) at the
//! cell/shell sample points.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use coulomb_kernel::{CartesianDensity, CartesianGrid, DiscreteMeasure, MeasureSupport, RadialProfile, SpaceDim};
use coulomb_potential::PotentialSpec;
use serde::{Deserialize, Serialize};

use crate::data::{Droplet, EquilibriumData, SolverLog};
use crate::error::{EquilibriumError, Result};
use crate::thermal::{grid_points, ThermalEquilibriumData};

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureLayout {
    Radial { edges: Vec<f64> },
    Cartesian { grid: CartesianGrid },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Equilibrium,
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArtifactHeader {
    pub version: u32,
    pub kind: ArtifactKind,
    pub dim: SpaceDim,
    pub potential: PotentialSpec,
    pub layout: MeasureLayout,
    /// c∞,1 or c_θ,1.
    pub constant: f64,
    pub theta: Option<f64>,
    pub droplet: Option<Droplet>,
    pub cells: usize,
    pub solver_log: SolverLog,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn layout_of(mu: &DiscreteMeasure) -> (MeasureLayout, Vec<f64>) {
    match mu.support() {
        MeasureSupport::Radial(p) => (MeasureLayout::Radial { edges: p.edges().to_vec() }, p.densities().to_vec()),
        MeasureSupport::Cartesian(c) => (MeasureLayout::Cartesian { grid: c.grid().clone() }, c.densities().to_vec()),
    }
}

fn write(stem: &Path, header: &ArtifactHeader, arrays: &[&[f64]]) -> Result<Vec<PathBuf>> {
    let (json, bin) = paths(stem);
    std::fs::write(&json, serde_json::to_string_pretty(header)?)?;
    let bytes: Vec<u8> = arrays.iter().flat_map(|a| a.iter()).flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(&bin, bytes)?;
    Ok(vec![json, bin])
}

fn read(stem: &Path, expected: ArtifactKind) -> Result<(ArtifactHeader, DiscreteMeasure)> {
    let (json, bin) = paths(stem);
    let header: ArtifactHeader = serde_json::from_str(&std::fs::read_to_string(&json)?)?;
    if header.version != ARTIFACT_VERSION || header.kind != expected {
        return Err(EquilibriumError::Artifact(format!(
            "{} is a {:?} artifact of version {}",
            json.display(),
            header.kind,
            header.version
        )));
    }
    let bytes = std::fs::read(&bin)?;
    if bytes.len() != 16 * header.cells {
        return Err(EquilibriumError::Artifact(format!(
            "{} has {} bytes, expected {}",
            bin.display(),
            bytes.len(),
            16 * header.cells
        )));
    }
    let density: Vec<f64> = bytes[..8 * header.cells]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mu = match &header.layout {
        MeasureLayout::Radial { edges } => {
            DiscreteMeasure::radial(RadialProfile::new(header.dim, edges.clone(), density)?)
        }
        MeasureLayout::Cartesian { grid } => DiscreteMeasure::cartesian(CartesianDensity::new(grid.clone(), density)?),
    };
    Ok((header, mu))
}

pub fn save_equilibrium(eq: &EquilibriumData, stem: &Path) -> Result<Vec<PathBuf>> {
    let (layout, density) = layout_of(eq.mu_inf1());
    let zeta: Vec<f64> = grid_points(eq.mu_inf1()).iter().map(|x| eq.zeta1(x)).collect();
    let header = ArtifactHeader {
        version: ARTIFACT_VERSION,
        kind: ArtifactKind::Equilibrium,
        dim: eq.dim(),
        potential: eq.potential().clone(),
        layout,
        constant: eq.c_inf1(),
        theta: None,
        droplet: Some(eq.droplet().clone()),
        cells: density.len(),
        solver_log: eq.log().clone(),
    };
    write(stem, &header, &[&density, &zeta])
}

pub fn load_equilibrium(stem: &Path) -> Result<EquilibriumData> {
    let (header, mu) = read(stem, ArtifactKind::Equilibrium)?;
    let droplet =
        header.droplet.ok_or_else(|| EquilibriumError::Artifact("equilibrium artifact without droplet".into()))?;
    Ok(EquilibriumData::new(header.dim, Arc::new(header.potential), mu, header.constant, droplet, header.solver_log))
}

pub fn save_thermal(t: &ThermalEquilibriumData, stem: &Path) -> Result<Vec<PathBuf>> {
    let (layout, density) = layout_of(t.mu_theta1());
    let logd: Vec<f64> = grid_points(t.mu_theta1()).iter().map(|x| t.log_density1(x)).collect();
    let header = ArtifactHeader {
        version: ARTIFACT_VERSION,
        kind: ArtifactKind::Thermal,
        dim: t.dim(),
        potential: t.potential().clone(),
        layout,
        constant: t.c_theta1(),
        theta: Some(t.theta()),
        droplet: None,
        cells: density.len(),
        solver_log: t.log().clone(),
    };
    write(stem, &header, &[&density, &logd])
}

pub fn load_thermal(stem: &Path) -> Result<ThermalEquilibriumData> {
    let (header, mu) = read(stem, ArtifactKind::Thermal)?;
    let theta = header.theta.ok_or_else(|| EquilibriumError::Artifact("thermal artifact without θ".into()))?;
    Ok(ThermalEquilibriumData::new(
        header.dim,
        theta,
        Arc::new(header.potential),
        mu,
        header.constant,
        header.solver_log,
    ))
}
