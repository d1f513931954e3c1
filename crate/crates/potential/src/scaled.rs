use std::sync::Arc;

use coulomb_kernel::{Confinement, SpaceDim};

use crate::error::{PotentialError, Result};
use crate::spec::PotentialSpec;

/// Lattice points per axis used for M_{x,N}.
pub const LAPLACIAN_LATTICE: usize = 11;

/// V_N(x) = N^{2/d} V₁(N^{−1/d} x) in microscopic coordinates.
#[derive(Debug, Clone)]
pub struct ScaledPotential {
    base: Arc<PotentialSpec>,
    dim: SpaceDim,
    n: usize,
}

impl ScaledPotential {
    pub fn new(base: PotentialSpec, dim: SpaceDim, n: usize) -> Result<Self> {
        Self::shared(Arc::new(base), dim, n)
    }

    pub fn shared(base: Arc<PotentialSpec>, dim: SpaceDim, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(PotentialError::InvalidSpec("particle number must be ≥ 1".into()));
        }
        base.check_dim(dim)?;
        Ok(Self { base, dim, n })
    }

    pub fn base(&self) -> &PotentialSpec {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> SpaceDim {
        self.dim
    }

    /// N^{1/d}.
    pub fn length_scale(&self) -> f64 {
        self.dim.length_scale(self.n as f64)
    }

    /// N^{2/d}.
    pub fn energy_scale(&self) -> f64 {
        (self.n as f64).powf(self.dim.two_over_d())
    }

    /// Macroscopic point N^{−1/d} x.
    pub fn to_macro(&self, x: &[f64]) -> Vec<f64> {
        let s = self.length_scale();
        x.iter().map(|v| v / s).collect()
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim.get() {
            return Err(PotentialError::Kernel(coulomb_kernel::KernelError::DimensionMismatch {
                expected: self.dim.get(),
                got: x.len(),
            }));
        }
        Ok(())
    }

    /// V_N(x).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        if self.n == 1 {
            return self.base.value(x);
        }
        Ok(self.energy_scale() * self.base.value(&self.to_macro(x))?)
    }

    /// ΔV_N(x) = ΔV₁(N^{−1/d} x).
    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        self.base.laplacian(&self.to_macro(x), self.dim)
    }

    /// M_{x,N}: the largest max(ΔV₁, 0) over the unit macroscopic ball about
    /// N^{−1/d} x, sampled on the 11^d lattice of [−1,1]^d restricted to the ball.
    pub fn laplacian_bound(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        macro_laplacian_bound(&self.base, self.dim, &self.to_macro(x))
    }
}

/// M_{y,1} for a macroscopic centre `y`.
pub fn macro_laplacian_bound(spec: &PotentialSpec, dim: SpaceDim, y: &[f64]) -> Result<f64> {
    let d = dim.get();
    let step = 2.0 / (LAPLACIAN_LATTICE - 1) as f64;
    let total = LAPLACIAN_LATTICE.pow(d as u32);
    let mut best = 0.0_f64;
    let mut z = vec![0.0; d];
    for k in 0..total {
        let mut rest = k;
        for zi in z.iter_mut() {
            *zi = -1.0 + step * (rest % LAPLACIAN_LATTICE) as f64;
            rest /= LAPLACIAN_LATTICE;
        }
        if z.iter().map(|v| v * v).sum::<f64>() > 1.0 + 1e-12 {
            continue;
        }
        let p: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
        best = best.max(spec.laplacian(&p, dim)?);
    }
    Ok(best)
}

impl Confinement for ScaledPotential {
    fn dim(&self) -> SpaceDim {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        self.eval(x).ok()
    }
}
