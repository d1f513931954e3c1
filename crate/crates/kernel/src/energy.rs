use crate::config::{dist2, norm2, Configuration};
use crate::dim::SpaceDim;
use crate::error::{KernelError, Result};
use crate::measure::DiscreteMeasure;

/// A confining potential in microscopic coordinates. `None` means the point
/// lies outside the domain on which the potential is defined.
pub trait Confinement: Send + Sync {
    fn dim(&self) -> SpaceDim;
    fn value(&self, x: &[f64]) -> Option<f64>;
}

/// V ≡ 0.
#[derive(Debug, Clone, Copy)]
pub struct FreeSpace(pub SpaceDim);

impl Confinement for FreeSpace {
    fn dim(&self) -> SpaceDim {
        self.0
    }
    fn value(&self, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
}

/// g as a function of the squared distance. No singularity check.
#[inline]
pub fn g_of_r2(r2: f64, dim: SpaceDim) -> f64 {
    if dim.is_two() {
        -0.5 * r2.ln()
    } else {
        1.0 / r2.sqrt()
    }
}

/// g as a function of the distance. No singularity check.
#[inline]
pub fn g_of_r(r: f64, dim: SpaceDim) -> f64 {
    if dim.is_two() {
        -r.ln()
    } else {
        1.0 / r
    }
}

/// The Coulomb kernel: −log|x| in d = 2, |x|^{2−d} in d = 3.
pub fn coulomb_kernel(x: &[f64], dim: SpaceDim) -> Result<f64> {
    dim.check(x.len())?;
    let r2 = norm2(x);
    if r2 == 0.0 {
        return Err(KernelError::Singular);
    }
    Ok(g_of_r2(r2, dim))
}

/// Σ_{i<j} g(x_i − x_j).
pub fn pair_energy(config: &Configuration) -> Result<f64> {
    let dim = config.dim();
    let n = config.len();
    let mut total = 0.0;
    for i in 0..n {
        let xi = config.point(i);
        let mut row = 0.0;
        for j in (i + 1)..n {
            let r2 = dist2(xi, config.point(j));
            if r2 == 0.0 {
                return Err(KernelError::Singular);
            }
            row += g_of_r2(r2, dim);
        }
        total += row;
    }
    Ok(total)
}

fn potential_at(pot: &dyn Confinement, x: &[f64]) -> Result<f64> {
    pot.value(x)
        .ok_or_else(|| KernelError::OutOfDomain { point: x.to_vec(), reason: "outside the potential's domain".into() })
}

/// H = ½ Σ_{i≠j} g(x_i − x_j) + Σ_i V_N(x_i).
pub fn total_energy(config: &Configuration, pot: &dyn Confinement) -> Result<f64> {
    if pot.dim() != config.dim() {
        return Err(KernelError::DimensionMismatch { expected: config.dim().get(), got: pot.dim().get() });
    }
    let mut v = 0.0;
    for p in config.points() {
        v += potential_at(pot, p)?;
    }
    Ok(pair_energy(config)? + v)
}

/// Change of the pair energy when particle `i` of the flat array moves to `new`.
///
/// In d = 2 the logarithms are batched four ratios at a time.
pub fn interaction_delta(positions: &[f64], dim: SpaceDim, i: usize, new: &[f64]) -> Result<f64> {
    let d = dim.get();
    let old = &positions[i * d..(i + 1) * d];
    let n = positions.len() / d;
    if dim.is_two() {
        let (ox, oy, nx, ny) = (old[0], old[1], new[0], new[1]);
        let mut log_sum = 0.0;
        let mut prod = 1.0;
        let mut k = 0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let (px, py) = (positions[2 * j], positions[2 * j + 1]);
            let ro = (ox - px) * (ox - px) + (oy - py) * (oy - py);
            let rn = (nx - px) * (nx - px) + (ny - py) * (ny - py);
            if rn == 0.0 || ro == 0.0 {
                return Err(KernelError::Singular);
            }
            prod *= rn / ro;
            k += 1;
            if k == 4 {
                log_sum += safe_ln(prod);
                prod = 1.0;
                k = 0;
            }
        }
        if k > 0 {
            log_sum += safe_ln(prod);
        }
        Ok(-0.5 * log_sum)
    } else {
        let mut acc = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let p = &positions[j * d..(j + 1) * d];
            let ro = dist2(old, p);
            let rn = dist2(new, p);
            if rn == 0.0 || ro == 0.0 {
                return Err(KernelError::Singular);
            }
            acc += 1.0 / rn.sqrt() - 1.0 / ro.sqrt();
        }
        Ok(acc)
    }
}

#[inline]
fn safe_ln(prod: f64) -> f64 {
    // Four ratios of squared distances cannot leave the f64 range unless the
    // configuration is pathological; that case is caught by the caller's
    // recomputation check.
    prod.ln()
}

/// H(config with x_i → new_pos) − H(config), in O(N) work.
pub fn energy_delta(config: &Configuration, i: usize, new_pos: &[f64], pot: &dyn Confinement) -> Result<f64> {
    let dim = config.dim();
    dim.check(new_pos.len())?;
    if i >= config.len() {
        return Err(KernelError::InvalidArgument(format!("particle index {i} out of range for N = {}", config.len())));
    }
    let old = config.point(i);
    if old == new_pos {
        return Ok(0.0);
    }
    let dv = potential_at(pot, new_pos)? - potential_at(pot, old)?;
    Ok(interaction_delta(config.as_flat(), dim, i, new_pos)? + dv)
}

/// Jellium energy F(X, μ) = Σ_{i<j} g(x_i − x_j) − Σ_i h^μ(x_i) + ½∬ g dμ dμ.
pub fn jellium_energy(config: &Configuration, background: &DiscreteMeasure) -> Result<f64> {
    if background.dim() != config.dim() {
        return Err(KernelError::DimensionMismatch { expected: config.dim().get(), got: background.dim().get() });
    }
    let n = config.len() as f64;
    let mass = background.total_mass();
    if n > 0.0 && ((mass - n) / n).abs() > 1e-8 {
        log::warn!("background mass {mass} differs from N = {n}");
    }
    let mut h_sum = 0.0;
    for p in config.points() {
        h_sum += background.potential(p)?;
    }
    Ok(pair_energy(config)? - h_sum + 0.5 * background.self_energy())
}
