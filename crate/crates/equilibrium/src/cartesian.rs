//! Obstacle problem for general potentials in d = 2 on a node-centred
//! finite-volume grid. The boundary flux ∂_n ζ = ∂_n V + ∂_n h^μ is updated
//! from the current μ in a few outer iterations, starting from a unit point
//! charge at the origin.

use std::f64::consts::PI;
use std::sync::Arc;

use coulomb_kernel::{CartesianDensity, CartesianGrid, DiscreteMeasure, SpaceDim};
use coulomb_potential::{Domain, PotentialKind, PotentialSpec};

use crate::data::{Droplet, EquilibriumData, SolverLog};
use crate::error::{EquilibriumError, Result};
use crate::radial::{outer_radius, CONTACT_THRESHOLD, MAX_SWEEPS, OBSTACLE_TOL, SOR_OMEGA};

const OUTER_ITERATIONS: usize = 6;
const FLUX_TOL: f64 = 1e-8;

/// Node box [lower, lower + (n−1)h] used when no half width is given.
fn default_box(spec: &PotentialSpec, h: f64) -> Result<(Vec<f64>, Vec<usize>)> {
    let centred = |half: f64| {
        let n = (2.0 * half / h).floor() as usize + 1;
        let lo = -0.5 * (n - 1) as f64 * h;
        (vec![lo; 2], vec![n; 2])
    };
    match (&spec.kind, &spec.domain) {
        (PotentialKind::GridSampled { grid, .. }, _) => {
            // Keep one potential-grid node of margin for the five-point Laplacian.
            let margin = 1.5 * grid.spacing;
            let mut lower = Vec::new();
            let mut shape = Vec::new();
            for a in 0..2 {
                let lo = grid.lower[a] + margin;
                let hi = grid.lower[a] + (grid.shape[a] - 1) as f64 * grid.spacing - margin;
                let n = ((hi - lo) / h).floor() as usize + 1;
                let used = (n - 1) as f64 * h;
                lower.push(0.5 * (lo + hi) - 0.5 * used);
                shape.push(n);
            }
            Ok((lower, shape))
        }
        (_, Some(Domain::Ball { radius })) => Ok(centred(0.99 * radius / std::f64::consts::SQRT_2)),
        (_, Some(Domain::Box { lower, upper })) => {
            let half = (0..2).map(|a| (-lower[a]).min(upper[a])).fold(f64::INFINITY, f64::min);
            Ok(centred(0.99 * half))
        }
        (_, None) => {
            let r = outer_radius(spec, SpaceDim::TWO)?;
            Ok(centred(1.5 * r + 0.25))
        }
    }
}

pub fn solve_obstacle_cartesian(
    spec: Arc<PotentialSpec>,
    spacing: f64,
    half_width: Option<f64>,
) -> Result<EquilibriumData> {
    let dim = SpaceDim::TWO;
    spec.check_dim(dim)?;
    let h = spacing;
    if !(h > 0.0 && h.is_finite()) {
        return Err(EquilibriumError::InvalidGrid(format!("spacing {h}")));
    }
    let (lower, shape) = match half_width {
        Some(w) => {
            let n = (2.0 * w / h).round() as usize + 1;
            (vec![-0.5 * (n - 1) as f64 * h; 2], vec![n; 2])
        }
        None => default_box(&spec, h)?,
    };
    let (nx, ny) = (shape[0], shape[1]);
    if nx < 8 || ny < 8 {
        return Err(EquilibriumError::InvalidGrid("fewer than 8 nodes per axis".into()));
    }
    let node = |i: usize, j: usize| [lower[0] + i as f64 * h, lower[1] + j as f64 * h];
    let idx = |i: usize, j: usize| j * nx + i;
    let len = nx * ny;

    let mut v = vec![0.0; len];
    let mut lap = vec![0.0; len];
    for j in 0..ny {
        for i in 0..nx {
            let p = node(i, j);
            v[idx(i, j)] = spec.value(&p)?;
            lap[idx(i, j)] = spec.laplacian(&p, dim)?;
        }
    }
    let edge_i = |i: usize| i == 0 || i == nx - 1;
    let edge_j = |j: usize| j == 0 || j == ny - 1;
    let area: Vec<f64> = (0..len)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            h * h * if edge_i(i) { 0.5 } else { 1.0 } * if edge_j(j) { 0.5 } else { 1.0 }
        })
        .collect();
    let source: Vec<f64> = lap.iter().zip(&area).map(|(l, a)| l * a).collect();
    // Conductance of the face between (i,j) and (i+1,j) is its length over h.
    let cx = |j: usize| if edge_j(j) { 0.5 } else { 1.0 };
    let cy = |i: usize| if edge_i(i) { 0.5 } else { 1.0 };

    // ∂_n V at boundary nodes, one-sided second order.
    let dn_v = |i: usize, j: usize, dir: (i64, i64)| -> f64 {
        let at = |a: i64, b: i64| v[idx(a as usize, b as usize)];
        let (i, j) = (i as i64, j as i64);
        let (di, dj) = dir;
        (3.0 * at(i, j) - 4.0 * at(i - di, j - dj) + at(i - 2 * di, j - 2 * dj)) / (2.0 * h)
    };
    // Boundary faces per node: (outward direction, face length).
    let mut faces: Vec<Vec<((i64, i64), f64)>> = vec![Vec::new(); len];
    for j in 0..ny {
        for i in 0..nx {
            let f = &mut faces[idx(i, j)];
            if i == 0 {
                f.push(((-1, 0), h * cx(j)));
            }
            if i == nx - 1 {
                f.push(((1, 0), h * cx(j)));
            }
            if j == 0 {
                f.push(((0, -1), h * cy(i)));
            }
            if j == ny - 1 {
                f.push(((0, 1), h * cy(i)));
            }
        }
    }
    let boundary: Vec<usize> = (0..len).filter(|&k| !faces[k].is_empty()).collect();
    let flux_from = |grad_h: &dyn Fn([f64; 2]) -> [f64; 2]| -> Vec<f64> {
        let mut b = vec![0.0; len];
        for &k in &boundary {
            let (i, j) = (k % nx, k / nx);
            let p = node(i, j);
            let gh = grad_h(p);
            b[k] = faces[k]
                .iter()
                .map(|&(dir, l)| (dn_v(i, j, dir) + gh[0] * dir.0 as f64 + gh[1] * dir.1 as f64) * l)
                .sum();
        }
        b
    };
    let mut bflux = flux_from(&|p: [f64; 2]| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [-p[0] / r2, -p[1] / r2]
    });

    let gmin = (0..len)
        .map(|k| {
            let p = node(k % nx, k / nx);
            v[k] + coulomb_kernel::g_of_r((p[0] * p[0] + p[1] * p[1]).sqrt().max(h), dim)
        })
        .fold(f64::INFINITY, f64::min);
    let mut zeta: Vec<f64> = (0..len)
        .map(|k| {
            let p = node(k % nx, k / nx);
            (v[k] + coulomb_kernel::g_of_r((p[0] * p[0] + p[1] * p[1]).sqrt().max(h), dim) - gmin).max(0.0)
        })
        .collect();

    let mut log = SolverLog {
        method: format!("cartesian projected SOR, ω = {SOR_OMEGA}, h = {h}, {nx}×{ny} nodes"),
        ..Default::default()
    };
    let neighbours = |k: usize| {
        let (i, j) = (k % nx, k / nx);
        let mut out = [(usize::MAX, 0.0); 4];
        if i > 0 {
            out[0] = (k - 1, cx(j));
        }
        if i + 1 < nx {
            out[1] = (k + 1, cx(j));
        }
        if j > 0 {
            out[2] = (k - nx, cy(i));
        }
        if j + 1 < ny {
            out[3] = (k + nx, cy(i));
        }
        out
    };
    let nbrs: Vec<[(usize, f64); 4]> = (0..len).map(neighbours).collect();
    let contact_mass = |zeta: &[f64], bflux: &[f64]| -> Vec<f64> {
        (0..len)
            .map(|k| {
                if zeta[k] > 0.0 {
                    return 0.0;
                }
                let div: f64 = nbrs[k]
                    .iter()
                    .filter(|(n, _)| *n != usize::MAX)
                    .map(|&(n, w)| w * (zeta[n] - zeta[k]))
                    .sum::<f64>()
                    + bflux[k];
                ((source[k] - div) / (2.0 * PI)).max(0.0)
            })
            .collect()
    };

    let mut mass = vec![0.0; len];
    for outer in 0..OUTER_ITERATIONS {
        let mut converged = false;
        for sweep in 1..=MAX_SWEEPS {
            let mut change = 0.0_f64;
            for k in 0..len {
                let mut wsum = 0.0;
                let mut acc = bflux[k] - source[k];
                for &(n, w) in &nbrs[k] {
                    if n != usize::MAX {
                        wsum += w;
                        acc += w * zeta[n];
                    }
                }
                let gs = acc / wsum;
                let new = (zeta[k] + SOR_OMEGA * (gs - zeta[k])).max(0.0);
                change = change.max((new - zeta[k]).abs());
                zeta[k] = new;
            }
            log.iterations += 1;
            log.residual = change;
            if sweep % 100 == 0 {
                log.history.push(change);
            }
            if change < OBSTACLE_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(EquilibriumError::NonConvergence {
                solver: "cartesian obstacle",
                iterations: log.iterations,
                residual: log.residual,
                damping: vec![],
            });
        }
        mass = contact_mass(&zeta, &bflux);
        let total: f64 = mass.iter().sum();
        let cells: Vec<(usize, f64)> =
            mass.iter().enumerate().filter(|(_, m)| **m > 0.0).map(|(k, m)| (k, m / total)).collect();
        let new_flux = flux_from(&|p: [f64; 2]| {
            let mut g = [0.0, 0.0];
            for &(k, m) in &cells {
                let q = node(k % nx, k / nx);
                let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                let r2 = dx * dx + dy * dy;
                g[0] -= m * dx / r2;
                g[1] -= m * dy / r2;
            }
            g
        });
        let diff = new_flux.iter().zip(&bflux).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        bflux = new_flux;
        log.notes.push(format!("outer {outer}: boundary flux change {diff:.3e}, raw mass {total:.10}"));
        if diff < FLUX_TOL {
            break;
        }
    }

    let total: f64 = mass.iter().sum();
    let cell_grid = CartesianGrid::new(vec![lower[0] - 0.5 * h, lower[1] - 0.5 * h], h, shape.clone())?;
    let density: Vec<f64> = mass.iter().map(|m| m / total / (h * h)).collect();
    let mask: Vec<bool> = density.iter().map(|&d| d > CONTACT_THRESHOLD).collect();
    let mu = DiscreteMeasure::cartesian(CartesianDensity::new(cell_grid.clone(), density.clone())?);

    // Centroid of μ, moved to the nearest contact cell if it falls outside.
    let mut centroid = [0.0, 0.0];
    for (k, d) in density.iter().enumerate() {
        let p = node(k % nx, k / nx);
        centroid[0] += d * h * h * p[0];
        centroid[1] += d * h * h * p[1];
    }
    let centre = match cell_grid.locate_cell(&centroid) {
        Some(k) if mask[k] => centroid.to_vec(),
        _ => {
            let k = (0..len)
                .filter(|&k| mask[k])
                .min_by(|&a, &b| {
                    let pa = node(a % nx, a / nx);
                    let pb = node(b % nx, b / nx);
                    let da = (pa[0] - centroid[0]).hypot(pa[1] - centroid[1]);
                    let db = (pb[0] - centroid[0]).hypot(pb[1] - centroid[1]);
                    da.total_cmp(&db)
                })
                .ok_or_else(|| EquilibriumError::UnsupportedGeometry("empty contact set".into()))?;
            node(k % nx, k / nx).to_vec()
        }
    };
    let c = mu.potential(&centre)? + spec.value(&centre)?;
    Ok(EquilibriumData::new(dim, spec, mu, c, Droplet::Cartesian { grid: cell_grid, mask }, log))
}
