use coulomb_equilibrium::{EquilibriumData, ThermalEquilibriumData};
use coulomb_kernel::{total_energy, Configuration};
use coulomb_potential::ScaledPotential;
use coulomb_sampler::GasParams;
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, Result};
use crate::iso::jellium;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitResidual {
    pub hamiltonian: f64,
    /// E(μ∞,N, V_N).
    pub equilibrium_energy: f64,
    /// F(X_N, μ∞,N).
    pub jellium: f64,
    pub zeta_sum: f64,
    pub residual: f64,
    /// residual / (1 + |H|).
    pub relative: f64,
}

/// |H(X) − (E(μ∞,V) + F(X, μ∞) + Σ ζ(x_i))| with every term computed
/// separately.
pub fn check_split_identity(
    config: &Configuration,
    eq: &EquilibriumData,
    p: &ScaledPotential,
) -> Result<SplitResidual> {
    let n = config.len();
    if p.n() != n || p.dim() != config.dim() || eq.dim() != config.dim() {
        return Err(OracleError::InvalidArgument("configuration, potential and equilibrium disagree on N or d".into()));
    }
    let hamiltonian = total_energy(config, p)?;
    let equilibrium_energy = eq.energy(n);
    let jellium = jellium(config, &eq.mu_inf(n))?;
    let zeta_sum: f64 = config.points().map(|x| eq.zeta_n_raw(n, x)).sum();
    let residual = (hamiltonian - (equilibrium_energy + jellium + zeta_sum)).abs();
    Ok(SplitResidual {
        hamiltonian,
        equilibrium_energy,
        jellium,
        zeta_sum,
        residual,
        relative: residual / (1.0 + hamiltonian.abs()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThermalSplitResidual {
    /// −βH.
    pub log_boltzmann: f64,
    /// β times the free energy E(μ_θ,N, V_N) + β^{−1}∫ μ_θ,N log μ_θ,N.
    pub beta_free_energy: f64,
    pub beta_jellium: f64,
    /// Σ log μ_θ,N(x_i).
    pub log_density_sum: f64,
    pub log_residual: f64,
}

/// |−βH − (−β𝓔_θ − βF(X, μ_θ) + Σ log μ_θ(x_i))| where 𝓔_θ is the free
/// energy of μ_θ. With the plain energy in place of 𝓔_θ the two sides differ
/// by a configuration-independent constant.
pub fn check_split_thermal(
    config: &Configuration,
    t: &ThermalEquilibriumData,
    params: &GasParams,
) -> Result<ThermalSplitResidual> {
    let n = config.len();
    if params.n != n || params.dim() != config.dim() || t.dim() != config.dim() {
        return Err(OracleError::InvalidArgument("configuration, parameters and thermal data disagree".into()));
    }
    if (params.theta() - t.theta()).abs() > 1e-9 * t.theta() {
        return Err(OracleError::InvalidArgument(format!(
            "θ = {} of the parameters differs from the thermal solve at θ = {}",
            params.theta(),
            t.theta()
        )));
    }
    let beta = params.beta;
    let log_boltzmann = -beta * total_energy(config, &params.potential)?;
    let beta_free_energy = beta * t.free_energy(n);
    let beta_jellium = beta * jellium(config, &t.mu_theta(n))?;
    let log_density_sum: f64 = config.points().map(|x| t.log_density_n(n, x)).sum();
    let log_residual = (log_boltzmann - (-beta_free_energy - beta_jellium + log_density_sum)).abs();
    Ok(ThermalSplitResidual { log_boltzmann, beta_free_energy, beta_jellium, log_density_sum, log_residual })
}
