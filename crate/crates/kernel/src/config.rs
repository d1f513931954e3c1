use serde::{Deserialize, Serialize};

use crate::dim::SpaceDim;
use crate::error::{KernelError, Result};

/// Positions of N particles in microscopic coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    dim: SpaceDim,
    positions: Vec<f64>,
}

impl Configuration {
    /// Builds a configuration from a flat row-major coordinate vector.
    pub fn from_flat(dim: SpaceDim, positions: Vec<f64>) -> Result<Self> {
        if !positions.len().is_multiple_of(dim.get()) {
            return Err(KernelError::InvalidConfiguration(format!(
                "{} coordinates do not split into {}-vectors",
                positions.len(),
                dim.get()
            )));
        }
        if let Some(bad) = positions.iter().find(|v| !v.is_finite()) {
            return Err(KernelError::InvalidConfiguration(format!("non-finite coordinate {bad}")));
        }
        Ok(Configuration { dim, positions })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: SpaceDim, points: &[P]) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * dim.get());
        for p in points {
            dim.check(p.as_ref().len())?;
            flat.extend_from_slice(p.as_ref());
        }
        Self::from_flat(dim, flat)
    }

    pub fn empty(dim: SpaceDim) -> Self {
        Configuration { dim, positions: Vec::new() }
    }

    #[inline]
    pub fn dim(&self) -> SpaceDim {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len() / self.dim.get()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim.get();
        &self.positions[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.dim.get())
    }

    #[inline]
    pub fn as_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.positions
    }

    /// Copy with particle `i` moved to `pos`.
    pub fn with_moved(&self, i: usize, pos: &[f64]) -> Result<Self> {
        self.dim.check(pos.len())?;
        if i >= self.len() {
            return Err(KernelError::InvalidArgument(format!(
                "particle index {i} out of range for N = {}",
                self.len()
            )));
        }
        let mut out = self.clone();
        let d = self.dim.get();
        out.positions[i * d..(i + 1) * d].copy_from_slice(pos);
        Ok(out)
    }

    /// Copy without particle `i`.
    pub fn without(&self, i: usize) -> Self {
        let d = self.dim.get();
        let mut positions = Vec::with_capacity(self.positions.len().saturating_sub(d));
        for (j, p) in self.points().enumerate() {
            if j != i {
                positions.extend_from_slice(p);
            }
        }
        Configuration { dim: self.dim, positions }
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}
