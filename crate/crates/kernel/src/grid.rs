use serde::{Deserialize, Serialize};

use crate::error::{KernelError, Result};

/// Uniform Cartesian grid. `lower` is the lower corner; cell `i` spans
/// `[lower + i·h, lower + (i+1)·h]` and node `i` sits at `lower + i·h`.
/// Flat indices run with the first axis fastest, so in d = 2 the cell
/// `(ix, iy)` has index `iy * nx + ix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid {
    pub lower: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl CartesianGrid {
    pub fn new(lower: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        if lower.len() != shape.len() || lower.is_empty() {
            return Err(KernelError::InvalidArgument("grid lower corner and shape disagree in dimension".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(KernelError::InvalidArgument(format!("bad grid spacing {spacing}")));
        }
        if shape.contains(&0) || lower.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::InvalidArgument("degenerate grid".into()));
        }
        Ok(CartesianGrid { lower, spacing, shape })
    }

    /// Cells of side `h` covering the cube [−half_width, half_width]^d.
    pub fn centered(d: usize, half_width: f64, h: f64) -> Result<Self> {
        let n = (2.0 * half_width / h).round().max(1.0) as usize;
        let extent = n as f64 * h;
        Self::new(vec![-0.5 * extent; d], h, vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn upper(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.shape).map(|(l, n)| l + *n as f64 * self.spacing).collect()
    }

    /// Multi-index of flat index `k` (first axis fastest).
    pub fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for &n in &self.shape {
            idx.push(k % n);
            k /= n;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).rev().fold(0, |k, (&i, &n)| k * n + i)
    }

    pub fn cell_center(&self, k: usize) -> Vec<f64> {
        self.unflatten(k).iter().zip(&self.lower).map(|(&i, l)| l + (i as f64 + 0.5) * self.spacing).collect()
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        self.unflatten(k).iter().zip(&self.lower).map(|(&i, l)| l + i as f64 * self.spacing).collect()
    }

    /// Flat index of the cell containing `x`, if any.
    pub fn locate_cell(&self, x: &[f64]) -> Option<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for ((xi, l), &n) in x.iter().zip(&self.lower).zip(&self.shape) {
            let t = ((xi - l) / self.spacing).floor();
            if t < 0.0 || t >= n as f64 {
                return None;
            }
            idx.push(t as usize);
        }
        Some(self.flatten(&idx))
    }
}

/// Uniform radial grid r_k = k·h on [0, r_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub spacing: f64,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn new(spacing: f64, r_max: f64) -> Result<Self> {
        if !(spacing > 0.0 && r_max > spacing && r_max.is_finite()) {
            return Err(KernelError::InvalidArgument(format!("bad radial grid: h = {spacing}, r_max = {r_max}")));
        }
        Ok(RadialGrid { spacing, r_max })
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        (self.r_max / self.spacing).round() as usize
    }
}
