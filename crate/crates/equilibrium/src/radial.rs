//! Obstacle problem for radial potentials, reduced to |x|.
//!
//! Unknown ζ at nodes r_k = k h with finite-volume cells [r_{k−½}, r_{k+½}].
//! On each cell ∫Δζ = ∫ΔV − c_d μ(cell), and ∫ΔV is exact from V'. The
//! outer boundary carries the Neumann flux ζ' = V' + g' of a unit mass.

use std::sync::Arc;

use coulomb_kernel::{g_of_r, DiscreteMeasure, RadialProfile, SpaceDim};
use coulomb_potential::PotentialSpec;

use crate::data::{Droplet, EquilibriumData, SolverLog};
use crate::error::{EquilibriumError, Result};

pub const SOR_OMEGA: f64 = 1.8;
pub const OBSTACLE_TOL: f64 = 1e-9;
pub const MAX_SWEEPS: usize = 100_000;
/// Cells with density above this belong to the contact set.
pub const CONTACT_THRESHOLD: f64 = 1e-6;

/// Largest radius available for a radial potential.
pub(crate) fn radial_domain(spec: &PotentialSpec) -> f64 {
    match &spec.domain {
        Some(coulomb_potential::Domain::Ball { radius }) => *radius,
        _ => f64::INFINITY,
    }
}

/// Outer droplet radius: the largest root of r^{d−1} V'(r) = 1.
pub(crate) fn outer_radius(spec: &PotentialSpec, dim: SpaceDim) -> Result<f64> {
    let flux = |r: f64| -> Result<f64> { Ok(r.powi(dim.get() as i32 - 1) * spec.radial_derivative(r)? - 1.0) };
    let top = radial_domain(spec).min(1e3);
    let n = 4000;
    let mut bracket = None;
    let mut prev = flux(top * 1e-6)?;
    for k in 1..=n {
        let r = top * k as f64 / n as f64;
        let f = flux(r)?;
        if prev < 0.0 && f >= 0.0 {
            bracket = Some((top * (k - 1) as f64 / n as f64, r));
        }
        prev = f;
    }
    let (mut lo, mut hi) = bracket
        .ok_or_else(|| EquilibriumError::UnsupportedGeometry(format!("no droplet edge found within radius {top}")))?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if flux(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Projected SOR on the radial finite-volume system.
pub fn solve_obstacle_radial(
    spec: Arc<PotentialSpec>,
    dim: SpaceDim,
    spacing: f64,
    r_max: Option<f64>,
) -> Result<EquilibriumData> {
    if !spec.is_radial() {
        return Err(EquilibriumError::UnsupportedGeometry("radial solver needs a radial potential".into()));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(EquilibriumError::InvalidGrid(format!("spacing {spacing}")));
    }
    let r_out = outer_radius(&spec, dim)?;
    let r_max = r_max.unwrap_or((1.5 * r_out + 0.25).min(radial_domain(&spec)));
    if r_max > radial_domain(&spec) + 1e-12 || r_max < r_out + 4.0 * spacing {
        return Err(EquilibriumError::InvalidGrid(format!(
            "r_max = {r_max} must lie in [{}, {}]",
            r_out + 4.0 * spacing,
            radial_domain(&spec)
        )));
    }
    let kmax = (r_max / spacing).round() as usize;
    let h = r_max / kmax as f64;
    let d = dim.get() as i32;
    let omega = dim.sphere_area();

    // Cell edges: 0, h/2, 3h/2, …, (K−½)h, Kh.
    let mut edges = Vec::with_capacity(kmax + 2);
    edges.push(0.0);
    edges.extend((1..=kmax).map(|k| (k as f64 - 0.5) * h));
    edges.push(kmax as f64 * h);
    let dv = edges.iter().map(|&r| spec.radial_derivative(r)).collect::<std::result::Result<Vec<_>, _>>()?;
    let flux_v: Vec<f64> = edges.iter().zip(&dv).map(|(r, v)| omega * r.powi(d - 1) * v).collect();
    let source: Vec<f64> = (0..=kmax).map(|k| flux_v[k + 1] - flux_v[k]).collect();
    let right: Vec<f64> = (0..kmax).map(|k| omega * edges[k + 1].powi(d - 1) / h).collect();
    let left: Vec<f64> = (0..=kmax).map(|k| omega * edges[k].powi(d - 1) / h).collect();
    let r_edge = kmax as f64 * h;
    let g_prime = if dim.is_two() { -1.0 / r_edge } else { -1.0 / (r_edge * r_edge) };
    let boundary_flux = omega * r_edge.powi(d - 1) * (spec.radial_derivative(r_edge)? + g_prime);

    // Start from the exact solution for a ball droplet of radius r_out.
    let v_out = spec.radial_value(r_out)?;
    let g_out = g_of_r(r_out, dim);
    let mut zeta: Vec<f64> = (0..=kmax)
        .map(|k| {
            let r = k as f64 * h;
            if r <= r_out {
                Ok(0.0)
            } else {
                Ok((spec.radial_value(r)? - v_out + g_of_r(r, dim) - g_out).max(0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut log =
        SolverLog { method: format!("radial projected SOR, ω = {SOR_OMEGA}, h = {h}"), ..Default::default() };
    let mut converged = false;
    for sweep in 1..=MAX_SWEEPS {
        let mut change = 0.0_f64;
        for k in 0..=kmax {
            let gs = if k == kmax {
                zeta[k - 1] + (boundary_flux - source[k]) / left[k]
            } else if k == 0 {
                zeta[1] - source[0] / right[0]
            } else {
                (right[k] * zeta[k + 1] + left[k] * zeta[k - 1] - source[k]) / (right[k] + left[k])
            };
            let new = (zeta[k] + SOR_OMEGA * (gs - zeta[k])).max(0.0);
            change = change.max((new - zeta[k]).abs());
            zeta[k] = new;
        }
        if sweep % 100 == 0 {
            log.history.push(change);
        }
        log.iterations = sweep;
        log.residual = change;
        if change < OBSTACLE_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EquilibriumError::NonConvergence {
            solver: "radial obstacle",
            iterations: log.iterations,
            residual: log.residual,
            damping: vec![],
        });
    }

    // c_d μ(cell) = ∫ΔV − ∫Δζ on the contact set.
    let mass: Vec<f64> = (0..=kmax)
        .map(|k| {
            if zeta[k] > 0.0 {
                return 0.0;
            }
            let out = if k == kmax { boundary_flux } else { right[k] * (zeta[k + 1] - zeta[k]) };
            let inn = if k == 0 { 0.0 } else { left[k] * (zeta[k] - zeta[k - 1]) };
            ((source[k] - out + inn) / omega).max(0.0)
        })
        .collect();
    let profile = RadialProfile::new(dim, edges.clone(), vec![0.0; kmax + 1])?;
    let mut density: Vec<f64> = (0..=kmax).map(|k| mass[k] / profile.shell_volume(k)).collect();
    let total: f64 = mass.iter().sum();
    for v in density.iter_mut() {
        *v /= total;
    }
    log.notes.push(format!("contact-set mass before normalization {total:.12}"));
    let mut complementarity = 0.0_f64;
    for k in 0..=kmax {
        complementarity = complementarity.max(zeta[k].min(mass[k] / profile.shell_volume(k)));
    }
    log.notes.push(format!("complementarity residual {complementarity:.3e}"));

    let intervals = contact_intervals(&spec, dim, &edges, &density, &mass, total)?;
    let mu = DiscreteMeasure::radial(RadialProfile::new(dim, edges, density)?);
    let mut centre = vec![0.0; dim.get()];
    if intervals[0][0] > 0.0 {
        centre[0] = 0.5 * (intervals[0][0] + intervals[0][1]);
    }
    let c = mu.potential(&centre)? + spec.value(&centre)?;
    Ok(EquilibriumData::new(dim, spec, mu, c, Droplet::Radial { intervals }, log))
}

/// Runs of contact cells, with partially filled end cells resolved by
/// bisection on the mass of c_d^{−1}ΔV.
fn contact_intervals(
    spec: &PotentialSpec,
    dim: SpaceDim,
    edges: &[f64],
    density: &[f64],
    mass: &[f64],
    total: f64,
) -> Result<Vec<[f64; 2]>> {
    let d = dim.get() as i32;
    let flux = |r: f64| -> f64 { r.powi(d - 1) * spec.radial_derivative(r).unwrap_or(f64::NAN) };
    let on: Vec<bool> = density.iter().map(|&v| v > CONTACT_THRESHOLD).collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < on.len() {
        if !on[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < on.len() && on[k + 1] {
            k += 1;
        }
        let end = k;
        // ∫_{cell part} ΔV dV / c_d = [r^{d−1}V'] difference, in unnormalized mass units.
        let lo = if start == 0 {
            0.0
        } else {
            let (a, b) = (edges[start], edges[start + 1]);
            let m = mass[start];
            bisect(a, b, |r| m - flux(b) + flux(r)).unwrap_or(a)
        };
        let (a, b) = (edges[end], edges[end + 1]);
        let m = mass[end];
        let hi = bisect(a, b, |r| flux(r) - flux(a) - m).unwrap_or(b);
        out.push([lo, hi]);
        k += 1;
    }
    if out.is_empty() || !(total > 0.0) {
        return Err(EquilibriumError::UnsupportedGeometry("empty contact set".into()));
    }
    Ok(out)
}

/// Root of an increasing function on [a, b], if bracketed.
fn bisect(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    if !(f(a) <= 0.0 && f(b) >= 0.0) {
        return None;
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
