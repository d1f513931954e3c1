use serde::{Deserialize, Serialize};

/// A counting window in microscopic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Window {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Window {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Window::Ball { center, radius }
    }

    /// Axis-aligned cube of side `side` centred at `center`.
    pub fn cube(center: &[f64], side: f64) -> Self {
        Window::Box {
            lower: center.iter().map(|c| c - 0.5 * side).collect(),
            upper: center.iter().map(|c| c + 0.5 * side).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Ball { center, .. } => center.len(),
            Window::Box { lower, .. } => lower.len(),
        }
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Window::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < radius * radius
            }
            Window::Box { lower, upper } => x.iter().zip(lower).zip(upper).all(|((v, l), u)| *v >= *l && *v < *u),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Ball { center, radius } => {
                let d = center.len();
                let unit = if d == 2 { std::f64::consts::PI } else { 4.0 / 3.0 * std::f64::consts::PI };
                unit * radius.powi(d as i32)
            }
            Window::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Window::Ball { radius, .. } => 2.0 * radius,
            Window::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| (u - l).powi(2)).sum::<f64>().sqrt(),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Window::Ball { center, .. } => center.clone(),
            Window::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
        }
    }
}
