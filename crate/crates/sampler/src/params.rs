use std::sync::Arc;

use coulomb_equilibrium::{EquilibriumData, ThermalEquilibriumData};
use coulomb_kernel::{Confinement, SpaceDim};
use coulomb_potential::{PotentialSpec, ScaledPotential};
use sha2::{Digest, Sha256};

use crate::error::{Result, SamplerError};

/// Parameters of the Gibbs measure ∝ e^{−βH} for N particles.
#[derive(Debug, Clone)]
pub struct GasParams {
    pub n: usize,
    pub beta: f64,
    pub potential: ScaledPotential,
    pub equilibrium: Option<Arc<EquilibriumData>>,
    pub thermal: Option<Arc<ThermalEquilibriumData>>,
}

impl GasParams {
    pub fn new(spec: PotentialSpec, dim: SpaceDim, n: usize, beta: f64) -> Result<Self> {
        Self::shared(Arc::new(spec), dim, n, beta)
    }

    pub fn shared(spec: Arc<PotentialSpec>, dim: SpaceDim, n: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(SamplerError::InvalidParams("N must be ≥ 1".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(SamplerError::InvalidParams(format!("β = {beta}")));
        }
        let potential = ScaledPotential::shared(spec, dim, n)?;
        let p = GasParams { n, beta, potential, equilibrium: None, thermal: None };
        if p.theta() <= 2.0 {
            log::warn!("θ = {} ≤ 2 for N = {n}, β = {beta}", p.theta());
        }
        Ok(p)
    }

    pub fn with_equilibrium(mut self, eq: Arc<EquilibriumData>) -> Result<Self> {
        if eq.dim() != self.dim() {
            return Err(SamplerError::InvalidParams("equilibrium data has the wrong dimension".into()));
        }
        self.equilibrium = Some(eq);
        Ok(self)
    }

    /// Attaches μ_θ; its θ must equal βN^{2/d}.
    pub fn with_thermal(mut self, t: Arc<ThermalEquilibriumData>) -> Result<Self> {
        if t.dim() != self.dim() || (t.theta() - self.theta()).abs() > 1e-9 * self.theta() {
            return Err(SamplerError::InvalidParams(format!(
                "thermal data at θ = {} does not match θ = {}",
                t.theta(),
                self.theta()
            )));
        }
        self.thermal = Some(t);
        Ok(self)
    }

    pub fn dim(&self) -> SpaceDim {
        self.potential.dim()
    }

    /// θ = βN^{2/d}.
    pub fn theta(&self) -> f64 {
        self.beta * self.potential.energy_scale()
    }

    /// Confinement experiments need θ > 2.
    pub fn require_confinement_regime(&self) -> Result<()> {
        if self.theta() > 2.0 {
            Ok(())
        } else {
            Err(SamplerError::InvalidParams(format!("θ = {} must exceed 2", self.theta())))
        }
    }

    /// V_N(x), or `None` outside the potential's domain.
    #[inline]
    pub fn v(&self, x: &[f64]) -> Option<f64> {
        Confinement::value(&self.potential, x)
    }

    /// SHA-256 over N, the bits of β, d and the potential JSON.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update(self.beta.to_bits().to_le_bytes());
        h.update((self.dim().get() as u64).to_le_bytes());
        h.update(self.potential.base().to_json().as_bytes());
        hex::encode(h.finalize())
    }
}
