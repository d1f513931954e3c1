use std::collections::BTreeMap;

use coulomb_kernel::SpaceDim;
use serde::{Deserialize, Serialize};

use crate::error::{PotentialError, Result};

/// Inverse temperatures β_N for the particle numbers in use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TemperatureSchedule {
    pub dim: SpaceDim,
    pub beta_of_n: BTreeMap<usize, f64>,
}

impl TemperatureSchedule {
    /// Builds a schedule and enforces θ_N = β_N N^{2/d} > 2 for every entry.
    pub fn new(dim: SpaceDim, beta_of_n: BTreeMap<usize, f64>) -> Result<Self> {
        let s = Self::unchecked(dim, beta_of_n);
        s.check()?;
        Ok(s)
    }

    /// A schedule that is not checked against (A1); `validate_assumptions` reports on it.
    pub fn unchecked(dim: SpaceDim, beta_of_n: BTreeMap<usize, f64>) -> Self {
        Self { dim, beta_of_n }
    }

    /// Constant θ across the given N: β_N = θ N^{−2/d}.
    pub fn constant_theta(dim: SpaceDim, theta: f64, ns: &[usize]) -> Result<Self> {
        let map = ns.iter().map(|&n| (n, theta / (n as f64).powf(dim.two_over_d()))).collect();
        Self::new(dim, map)
    }

    /// Fixed β across the given N.
    pub fn constant_beta(dim: SpaceDim, beta: f64, ns: &[usize]) -> Result<Self> {
        Self::new(dim, ns.iter().map(|&n| (n, beta)).collect())
    }

    pub fn beta(&self, n: usize) -> Option<f64> {
        self.beta_of_n.get(&n).copied()
    }

    pub fn theta(&self, n: usize) -> Option<f64> {
        self.beta(n).map(|b| b * (n as f64).powf(self.dim.two_over_d()))
    }

    /// θ_* = min over the configured N of θ_N.
    pub fn theta_star(&self) -> Option<f64> {
        self.beta_of_n.keys().filter_map(|&n| self.theta(n)).min_by(f64::total_cmp)
    }

    pub fn check(&self) -> Result<()> {
        if self.beta_of_n.is_empty() {
            return Err(PotentialError::InvalidSchedule("empty temperature schedule".into()));
        }
        for (&n, &beta) in &self.beta_of_n {
            if n == 0 || !(beta > 0.0 && beta.is_finite()) {
                return Err(PotentialError::InvalidSchedule(format!("bad entry N = {n}, β = {beta}")));
            }
            let theta = self.theta(n).unwrap_or(f64::NAN);
            if !(theta > 2.0) {
                return Err(PotentialError::InvalidSchedule(format!("θ_N = β_N N^(2/d) = {theta} ≤ 2 at N = {n}")));
            }
        }
        Ok(())
    }
}
