use serde::{Deserialize, Serialize};

/// Discretization requested for a solve. `None` extents are chosen from the
/// potential (droplet size for μ∞, decay of e^{−θζ₁} for μ_θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum GridSpec {
    /// Radial reduction for radial potentials, 2D Cartesian grid otherwise.
    #[default]
    Auto,
    Radial {
        spacing: f64,
        r_max: Option<f64>,
    },
    Cartesian {
        spacing: f64,
        half_width: Option<f64>,
    },
}


pub const DEFAULT_RADIAL_SPACING: f64 = 1.0 / 256.0;
pub const DEFAULT_THERMAL_RADIAL_SPACING: f64 = 1.0 / 512.0;
pub const DEFAULT_CARTESIAN_SPACING: f64 = 1.0 / 32.0;
