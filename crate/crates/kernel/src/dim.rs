use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{KernelError, Result};

/// Ambient dimension. Only d = 2 and d = 3 are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SpaceDim(u8);

impl SpaceDim {
    pub const TWO: SpaceDim = SpaceDim(2);
    pub const THREE: SpaceDim = SpaceDim(3);

    pub fn new(d: usize) -> Result<Self> {
        match d {
            2 | 3 => Ok(SpaceDim(d as u8)),
            _ => Err(KernelError::UnsupportedDim(d)),
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_two(self) -> bool {
        self.0 == 2
    }

    /// Area of the unit sphere; equals c_d for d = 2, 3.
    #[inline]
    pub fn sphere_area(self) -> f64 {
        if self.is_two() {
            2.0 * PI
        } else {
            4.0 * PI
        }
    }

    /// Volume of the unit ball.
    #[inline]
    pub fn ball_volume(self) -> f64 {
        self.sphere_area() / self.get() as f64
    }

    /// Volume of the ball of radius `r`.
    #[inline]
    pub fn ball_volume_r(self, r: f64) -> f64 {
        self.ball_volume() * r.powi(self.get() as i32)
    }

    /// The exponent 2/d of the N-scaling.
    #[inline]
    pub fn two_over_d(self) -> f64 {
        2.0 / self.get() as f64
    }

    /// N^{1/d}, the microscopic length of a unit macroscopic length.
    #[inline]
    pub fn length_scale(self, n: f64) -> f64 {
        if self.is_two() {
            n.sqrt()
        } else {
            n.cbrt()
        }
    }

    pub(crate) fn check(self, len: usize) -> Result<()> {
        if len == self.get() {
            Ok(())
        } else {
            Err(KernelError::DimensionMismatch { expected: self.get(), got: len })
        }
    }
}

impl TryFrom<usize> for SpaceDim {
    type Error = KernelError;
    fn try_from(d: usize) -> Result<Self> {
        SpaceDim::new(d)
    }
}

impl From<SpaceDim> for usize {
    fn from(d: SpaceDim) -> usize {
        d.get()
    }
}

impl std::fmt::Display for SpaceDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d={}", self.0)
    }
}

/// The constant c_d in −Δg = c_d δ₀.
pub fn fundamental_constant(dim: SpaceDim) -> f64 {
    dim.sphere_area()
}

/// Same as [`fundamental_constant`] for a raw dimension, rejecting d ∉ {2, 3}.
pub fn fundamental_constant_of(d: usize) -> Result<f64> {
    SpaceDim::new(d).map(fundamental_constant)
}
