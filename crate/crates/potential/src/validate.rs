//! Numerical checks of the standing assumptions (A1)–(A7).

use std::f64::consts::PI;

use coulomb_kernel::{g_of_r, GaussLegendre, SpaceDim};
use serde::{Deserialize, Serialize};

use crate::scaled::macro_laplacian_bound;
use crate::schedule::TemperatureSchedule;
use crate::spec::{Domain, PotentialKind, PotentialSpec};

/// Tail integrals are truncated at this macroscopic radius.
pub const TAIL_CUTOFF: f64 = 50.0;
/// Log-spaced panels on [1, cutoff].
const TAIL_PANELS: usize = 400;
/// Rays used for minima over spheres of non-radial potentials.
const SPHERE_RAYS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not numerically checkable; taken from the user's declaration.
    Declared,
    /// Not checkable and not declared.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub id: String,
    pub status: CheckStatus,
    /// Main computed quantity (θ_*, tail integral, fitted α, …) when there is one.
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn get(&self, id: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn status(&self, id: &str) -> Option<CheckStatus> {
        self.get(id).map(|c| c.status)
    }

    /// No assumption failed.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let v = c.value.map(|v| format!(" ({v:.6e})")).unwrap_or_default();
            writeln!(f, "{:<3} {:?}{} {}", c.id, c.status, v, c.detail)?;
        }
        Ok(())
    }
}

/// What (A5)/(A6) need from a solved equilibrium problem at N = 1.
pub trait EquilibriumView {
    /// ζ₁(x).
    fn zeta1(&self, x: &[f64]) -> f64;
    /// dist(x, Σ₁).
    fn distance_to_droplet(&self, x: &[f64]) -> f64;
    /// A radius R with Σ₁ ⊂ B_R(0).
    fn droplet_extent(&self) -> f64;
}

/// Runs every check. (A5)/(A6) need an equilibrium; without one they fall back
/// to the declarations.
pub fn validate_assumptions(
    spec: &PotentialSpec,
    schedule: &TemperatureSchedule,
    equilibrium: Option<&dyn EquilibriumView>,
) -> ValidationReport {
    let dim = schedule.dim;
    let mut checks = vec![check_a1(schedule)];
    checks.push(check_a2(spec, dim));
    checks.push(check_a3(spec, dim, schedule.theta_star()));
    checks.push(declared(spec, "A4", "boundary regularity is recorded as declared"));
    match equilibrium {
        Some(eq) => {
            checks.push(check_a5(spec, dim, eq));
            checks.push(check_a6(spec, dim, eq));
        }
        None => {
            checks.push(declared(spec, "A5", "no equilibrium supplied"));
            checks.push(declared(spec, "A6", "no equilibrium supplied"));
        }
    }
    checks.push(check_a7(spec, dim));
    ValidationReport { checks }
}

fn declared(spec: &PotentialSpec, id: &str, why: &str) -> AssumptionCheck {
    let status = match spec.declared_assumptions.get(id) {
        Some(true) => CheckStatus::Declared,
        Some(false) => CheckStatus::Fail,
        None => CheckStatus::Undetermined,
    };
    AssumptionCheck { id: id.into(), status, value: None, detail: why.into() }
}

fn check_a1(schedule: &TemperatureSchedule) -> AssumptionCheck {
    let theta = schedule.theta_star();
    let pass = theta.is_some_and(|t| t > 2.0) && schedule.check().is_ok();
    AssumptionCheck {
        id: "A1".into(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        value: theta,
        detail: "θ_* = min_N β_N N^(2/d) > 2".into(),
    }
}

/// Largest radius at which the potential can be evaluated on a whole sphere.
fn domain_radius(spec: &PotentialSpec) -> f64 {
    match &spec.domain {
        None => f64::INFINITY,
        Some(Domain::Ball { radius }) => *radius,
        Some(Domain::Box { lower, upper }) => {
            lower.iter().zip(upper).map(|(l, u)| (-l).min(*u)).fold(f64::INFINITY, f64::min).max(0.0)
        }
    }
}

/// Minimum of V₁ over the sphere of radius r.
fn sphere_min(spec: &PotentialSpec, dim: SpaceDim, r: f64) -> Option<f64> {
    if spec.is_radial() {
        return spec.radial_value(r).ok();
    }
    // Non-radial kinds exist only in d = 2.
    let _ = dim;
    (0..SPHERE_RAYS)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / SPHERE_RAYS as f64;
            spec.value(&[r * a.cos(), r * a.sin()]).ok()
        })
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
}

fn check_a2(spec: &PotentialSpec, dim: SpaceDim) -> AssumptionCheck {
    let r_hi = domain_radius(spec).min(TAIL_CUTOFF);
    let mut out = AssumptionCheck { id: "A2".into(), status: CheckStatus::Fail, value: None, detail: String::new() };
    if let PotentialKind::Quadratic { .. } = spec.kind {
        out.status = CheckStatus::Pass;
        out.detail = "quadratic growth".into();
        return out;
    }
    if r_hi < 2.0 {
        out.status = declared(spec, "A2", "").status;
        out.detail = format!("domain radius {r_hi} too small for a tail check");
        return out;
    }
    // V₁ + g along log-spaced radii on [r_hi/8, r_hi].
    let r_lo = r_hi / 8.0;
    let samples: Option<Vec<f64>> = (0..=32)
        .map(|k| {
            let r = r_lo * (r_hi / r_lo).powf(k as f64 / 32.0);
            sphere_min(spec, dim, r).map(|v| v + g_of_r(r, dim))
        })
        .collect();
    let Some(s) = samples else {
        out.detail = "potential not evaluable on the tail".into();
        return out;
    };
    let increasing = s.windows(2).all(|w| w[1] > w[0]);
    let gain = s[s.len() - 1] - s[0];
    out.value = Some(gain);
    out.detail = format!("min (V₁+g) on |x| ∈ [{r_lo:.3}, {r_hi:.3}]: increasing = {increasing}, gain = {gain:.4}");
    if increasing && gain >= 1.0 {
        out.status = CheckStatus::Pass;
    }
    out
}

/// ∫_{|x|≥1} e^{−φ(x)} w(|x|) dx on a log-spaced grid to the cutoff, plus the
/// one-term remainder |S^{d−1}| e^{−φ(R)} w(R) R^{d−1} / φ'(R).
struct TailIntegral {
    value: f64,
    remainder: f64,
    cutoff: f64,
}

fn tail_integral(
    spec: &PotentialSpec,
    dim: SpaceDim,
    phi_of: impl Fn(f64, f64) -> f64,
    weight: impl Fn(f64) -> f64,
) -> Option<TailIntegral> {
    let cutoff = domain_radius(spec).min(TAIL_CUTOFF);
    if cutoff <= 1.0 {
        return None;
    }
    let d = dim.get() as i32;
    let area = dim.sphere_area();
    // φ evaluated as the sphere minimum of V₁, which bounds the sphere integral for radial kinds exactly.
    let phi = |r: f64| sphere_min(spec, dim, r).map(|v| phi_of(v, r));
    let gl = GaussLegendre::new(8);
    let lmax = cutoff.ln();
    let mut value = 0.0;
    for p in 0..TAIL_PANELS {
        let (a, b) = (lmax * p as f64 / TAIL_PANELS as f64, lmax * (p + 1) as f64 / TAIL_PANELS as f64);
        for (u, w) in gl.on(a, b) {
            let r = u.exp();
            let integrand = if spec.is_radial() {
                area * (-phi(r)?).exp()
            } else {
                // Average over rays rather than the minimum.
                let mean = (0..SPHERE_RAYS)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / SPHERE_RAYS as f64;
                        spec.value(&[r * t.cos(), r * t.sin()]).map(|v| (-phi_of(v, r)).exp())
                    })
                    .sum::<Result<f64, _>>()
                    .ok()?
                    / SPHERE_RAYS as f64;
                area * mean
            };
            value += w * integrand * weight(r) * r.powi(d);
        }
    }
    let eps = 1e-4 * cutoff;
    let slope = (phi(cutoff)? - phi(cutoff - eps)?) / eps;
    let remainder = if slope > 0.0 {
        area * (-phi(cutoff)?).exp() * weight(cutoff) * cutoff.powi(d - 1) / slope
    } else {
        f64::INFINITY
    };
    Some(TailIntegral { value, remainder, cutoff })
}

fn check_a3(spec: &PotentialSpec, dim: SpaceDim, theta_star: Option<f64>) -> AssumptionCheck {
    let mut out = AssumptionCheck { id: "A3".into(), status: CheckStatus::Fail, value: None, detail: String::new() };
    let Some(theta) = theta_star else {
        out.detail = "no θ_* available".into();
        return out;
    };
    let parts: Vec<Option<TailIntegral>> = if dim.is_two() {
        vec![
            tail_integral(spec, dim, |v, r| 0.5 * theta * (v - r.ln()), |_| 1.0),
            tail_integral(spec, dim, |v, r| theta * (v - r.ln()), |r| r * r.ln().powi(2)),
        ]
    } else {
        vec![tail_integral(spec, dim, |v, _| 0.5 * theta * v, |_| 1.0)]
    };
    if parts.iter().any(Option::is_none) {
        out.status = declared(spec, "A3", "").status;
        out.detail = "tail not evaluable on the declared domain".into();
        return out;
    }
    let parts: Vec<TailIntegral> = parts.into_iter().flatten().collect();
    let total: f64 = parts.iter().map(|p| p.value).sum();
    let remainder: f64 = parts.iter().map(|p| p.remainder).sum();
    out.value = Some(parts[0].value);
    out.detail = format!(
        "integrals {:?} to radius {}, remainder bound {remainder:.3e}",
        parts.iter().map(|p| p.value).collect::<Vec<_>>(),
        parts[0].cutoff
    );
    // The remainder must be small relative to the computed part.
    if total.is_finite() && remainder.is_finite() && remainder <= 1e-3 * total.max(1e-300) + 1e-12 {
        out.status = CheckStatus::Pass;
    }
    out
}

/// Lattice of spacing `h` covering [−R, R]^d.
fn lattice(dim: SpaceDim, r: f64, h: f64) -> Vec<Vec<f64>> {
    let n = (2.0 * r / h).ceil() as usize + 1;
    let d = dim.get();
    (0..n.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let i = k % n;
                    k /= n;
                    -r + i as f64 * h
                })
                .collect()
        })
        .collect()
}

/// Neighbourhood width of Σ₁ used for (A5).
const A5_NEIGHBOURHOOD: f64 = 0.1;

fn check_a5(spec: &PotentialSpec, dim: SpaceDim, eq: &dyn EquilibriumView) -> AssumptionCheck {
    let r = eq.droplet_extent() + A5_NEIGHBOURHOOD;
    let h = r / if dim.is_two() { 40.0 } else { 15.0 };
    let mut alpha = f64::INFINITY;
    let mut failed_eval = false;
    for p in lattice(dim, r, h) {
        if eq.distance_to_droplet(&p) > A5_NEIGHBOURHOOD {
            continue;
        }
        match spec.laplacian(&p, dim) {
            Ok(l) => alpha = alpha.min(l),
            Err(_) => failed_eval = true,
        }
    }
    let pass = !failed_eval && alpha.is_finite() && alpha > 0.0;
    AssumptionCheck {
        id: "A5".into(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        value: Some(alpha),
        detail: format!("min ΔV₁ within {A5_NEIGHBOURHOOD} of Σ₁"),
    }
}

fn check_a6(spec: &PotentialSpec, dim: SpaceDim, eq: &dyn EquilibriumView) -> AssumptionCheck {
    let r = (3.0 * eq.droplet_extent()).min(domain_radius(spec) * 0.999);
    let h = r / if dim.is_two() { 60.0 } else { 20.0 };
    let mut alpha = f64::INFINITY;
    for p in lattice(dim, r, h) {
        if p.iter().map(|v| v * v).sum::<f64>() > r * r {
            continue;
        }
        let dist = eq.distance_to_droplet(&p);
        if dist <= h {
            continue;
        }
        alpha = alpha.min(eq.zeta1(&p) / dist.powi(2).min(1.0));
    }
    AssumptionCheck {
        id: "A6".into(),
        status: if alpha > 0.0 && alpha.is_finite() { CheckStatus::Pass } else { CheckStatus::Fail },
        value: Some(alpha),
        detail: format!("min ζ₁/min(dist², 1) on |x| ≤ {r:.3} away from Σ₁"),
    }
}

fn check_a7(spec: &PotentialSpec, dim: SpaceDim) -> AssumptionCheck {
    if dim.is_two() {
        return AssumptionCheck {
            id: "A7".into(),
            status: CheckStatus::Pass,
            value: None,
            detail: "only required for d ≥ 3".into(),
        };
    }
    // Spot check: V₁/M_{x,1} increasing along the radii 5, 10, 20, 40 available in the domain.
    let r_max = domain_radius(spec) - 1.0;
    let ratios: Option<Vec<f64>> = [5.0, 10.0, 20.0, 40.0]
        .into_iter()
        .filter(|r| *r <= r_max)
        .map(|r| {
            let x = [r, 0.0, 0.0];
            let v = spec.value(&x).ok()?;
            let m = macro_laplacian_bound(spec, dim, &x).ok()?;
            Some(if m > 0.0 { v / m } else { f64::INFINITY })
        })
        .collect();
    let declared_flag = spec.declared_assumptions.get("A7").copied();
    let mut out = AssumptionCheck { id: "A7".into(), status: CheckStatus::Fail, value: None, detail: String::new() };
    match ratios {
        Some(rs) if rs.len() >= 2 => {
            let increasing = rs.windows(2).all(|w| w[1] > w[0]);
            out.value = rs.last().copied();
            out.detail = format!("V₁/M spot values {rs:?}");
            out.status = match (increasing, declared_flag) {
                (false, _) | (_, Some(false)) => CheckStatus::Fail,
                (true, Some(true)) => CheckStatus::Declared,
                (true, None) => CheckStatus::Pass,
            };
        }
        _ => {
            out.status = declared(spec, "A7", "").status;
            out.detail = "domain too small for a spot check".into();
        }
    }
    out
}
