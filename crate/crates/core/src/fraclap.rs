//! The fractional Laplacian `(-Delta)^s` on sampled functions: a
//! principal-value quadrature evaluator, a spectral evaluator, and the
//! weak-form identity against test functions.

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::fft::{fft_nd, signed_frequency};
use crate::grid::{distance, GridFunction};
use crate::kernel::smooth_ramp;
use crate::params::{unit_sphere_area, FracParams};
use crate::quadrature::gauss_legendre;

/// Default near-field radius, in grid cells.
pub const DEFAULT_DELTA_CELLS: f64 = 8.0;

/// Relative decay demanded of the spectral evaluator's input at the boundary.
pub const SPECTRAL_DECAY_TOLERANCE: f64 = 1e-8;

const FACE_NODES: usize = 24;
const RAY_NODES: usize = 24;

/// Values of `u` outside the sampled box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    Zero,
    Constant { value: f64 },
    /// `amplitude * |y - center|^{-(N-2s)}`.
    PowerLaw { amplitude: f64, center: Vec<f64> },
}

impl TailModel {
    /// Least-squares amplitude of `|y - center|^{-(N-2s)}` against the
    /// outermost layer of cells.
    pub fn fit_power_law(u: &GridFunction, center: &[f64], params: &FracParams) -> Result<Self> {
        if center.len() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: center.len(),
            });
        }
        let a = params.riesz_exponent();
        let n = u.resolution();
        let mut idx = vec![0usize; u.dim()];
        let mut p = vec![0.0; u.dim()];
        let mut count = 0usize;
        let mut acc = 0.0;
        for (i, v) in u.values().iter().enumerate() {
            u.multi_index(i, &mut idx);
            if idx.iter().any(|&j| j == 0 || j == n - 1) {
                u.point_into(i, &mut p);
                acc += v * distance(&p, center).powf(a);
                count += 1;
            }
        }
        Ok(TailModel::PowerLaw {
            amplitude: acc / count as f64,
            center: center.to_vec(),
        })
    }

    fn check(&self, dim: usize) -> Result<()> {
        match self {
            TailModel::Zero => Ok(()),
            TailModel::Constant { value } if value.is_finite() => Ok(()),
            TailModel::Constant { value } => Err(invalid("tail", format!("non-finite constant {value}"))),
            TailModel::PowerLaw { amplitude, center } => {
                if center.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: center.len(),
                    });
                }
                if !amplitude.is_finite() {
                    return Err(invalid("tail", format!("non-finite amplitude {amplitude}")));
                }
                Ok(())
            }
        }
    }
}

/// Radial cutoff: one on `[0, delta/2]`, a quintic ramp down to zero at `delta`.
fn psi(r: f64, delta: f64) -> f64 {
    smooth_ramp(2.0 * r / delta - 1.0)
}

/// `int psi(|z|) |z|^{2-N-2s} dz` over `R^N`.
fn psi_moment_integral(dim: usize, s: f64, delta: f64) -> f64 {
    let b = 2.0 - 2.0 * s;
    let inner = (0.5 * delta).powf(b) / b;
    let ramp = gauss_legendre(64).integrate(0.5 * delta, delta, |r| psi(r, delta) * r.powf(b - 1.0));
    unit_sphere_area(dim) * (inner + ramp)
}

/// `sum_{k != 0} psi(|kh|) |kh|^{2-N-2s} h^N` over the lattice.
fn psi_moment_lattice(dim: usize, s: f64, delta: f64, h: f64) -> f64 {
    let m = (delta / h).floor() as i64 + 1;
    let width = (2 * m + 1) as usize;
    let total = width.pow(dim as u32);
    let alpha = 2.0 - dim as f64 - 2.0 * s;
    let terms = exec::map_range(total, |flat| {
        let mut rem = flat;
        let mut r2 = 0.0;
        for _ in 0..dim {
            let k = (rem % width) as i64 - m;
            rem /= width;
            r2 += (k as f64 * h).powi(2);
        }
        if r2 == 0.0 {
            return 0.0;
        }
        let r = r2.sqrt();
        if r >= delta {
            0.0
        } else {
            psi(r, delta) * r.powf(alpha)
        }
    });
    exec::pairwise_sum(&terms) * h.powi(dim as i32)
}

/// Lattice-versus-continuum defect of the quadratic Taylor term.
fn taylor_defect(dim: usize, s: f64, delta: f64, h: f64) -> f64 {
    psi_moment_lattice(dim, s, delta, h) - psi_moment_integral(dim, s, delta)
}

/// Quadrature nodes `(p, d * dA)` on the box faces, graded toward the foot
/// of the perpendicular from `x`.
fn face_nodes(u: &GridFunction, x: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let dim = u.dim();
    let lo: Vec<f64> = (0..dim).map(|k| u.lower(k)).collect();
    let hi: Vec<f64> = (0..dim).map(|k| u.lower(k) + u.resolution() as f64 * u.spacing()).collect();
    let rule = gauss_legendre(FACE_NODES);
    let q = rule.len();
    let m = dim - 1;
    let mut out = Vec::new();
    for axis in 0..dim {
        for side in [lo[axis], hi[axis]] {
            let d = (side - x[axis]).abs();
            let others: Vec<usize> = (0..dim).filter(|&k| k != axis).collect();
            for orthant in 0..(1usize << m) {
                let ext: Vec<(f64, f64)> = others
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| {
                        if orthant >> j & 1 == 0 {
                            (1.0, hi[k] - x[k])
                        } else {
                            (-1.0, x[k] - lo[k])
                        }
                    })
                    .collect();
                let upper: Vec<f64> = ext.iter().map(|(_, e)| (e / d).asinh()).collect();
                for flat in 0..q.pow(m as u32) {
                    let mut rem = flat;
                    let mut p = x.to_vec();
                    p[axis] = side;
                    let mut w = d;
                    for (j, &k) in others.iter().enumerate() {
                        let i = rem % q;
                        rem /= q;
                        let half = 0.5 * upper[j];
                        let t = half * (1.0 + rule.nodes[i]);
                        p[k] = x[k] + ext[j].0 * d * t.sinh();
                        w *= rule.weights[i] * half * d * t.cosh();
                    }
                    out.push((p, w));
                }
            }
        }
    }
    out
}

/// `int_{outside} (u(x) - u(y)) |x-y|^{-N-2s} dy` under the tail model.
fn exterior_term(u: &GridFunction, ux: f64, tail: &TailModel, x: &[f64], params: &FracParams) -> f64 {
    let dim = u.dim();
    let s = params.order();
    let beta = -(dim as f64) - 2.0 * s;
    let nodes = face_nodes(u, x);
    let ray = gauss_legendre(RAY_NODES);
    let terms: Vec<f64> = nodes
        .iter()
        .map(|(p, w)| {
            let k = w * distance(p, x).powf(beta);
            match tail {
                TailModel::Zero => ux * k / (2.0 * s),
                TailModel::Constant { value } => (ux - value) * k / (2.0 * s),
                TailModel::PowerLaw { amplitude, center } => {
                    let a = params.riesz_exponent();
                    let along = ray.integrate(0.0, 1.0, |sig| {
                        let mut r2 = 0.0;
                        for j in 0..dim {
                            let v = p[j] - x[j] + sig * (x[j] - center[j]);
                            r2 += v * v;
                        }
                        sig.powi(dim as i32 - 1) * r2.powf(-0.5 * a)
                    });
                    ux * k / (2.0 * s) - amplitude * k * along
                }
            }
        })
        .collect();
    exec::pairwise_sum(&terms)
}

fn snap_to_grid(u: &GridFunction, x: &[f64]) -> Result<Vec<usize>> {
    if x.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: x.len(),
        });
    }
    let idx = u
        .cell_of(x)
        .ok_or_else(|| invalid("x", format!("{x:?} is outside the grid")))?;
    let c = u.point(u.flat_index(&idx));
    if distance(&c, x) > 1e-9 * u.spacing() {
        return Err(invalid("x", format!("{x:?} is not a grid point")));
    }
    Ok(idx)
}

/// Fourth-order central Laplacian at a grid index at least two cells inside.
fn laplacian_4th(u: &GridFunction, idx: &[usize]) -> f64 {
    let h2 = u.spacing() * u.spacing();
    let v = u.values();
    let at = |axis: usize, off: i64| {
        let mut j = idx.to_vec();
        j[axis] = (j[axis] as i64 + off) as usize;
        v[u.flat_index(&j)]
    };
    let c = v[u.flat_index(idx)];
    (0..u.dim())
        .map(|k| (-at(k, 2) + 16.0 * at(k, 1) - 30.0 * c + 16.0 * at(k, -1) - at(k, -2)) / (12.0 * h2))
        .sum()
}

/// `(-Delta)^s u (x)` by principal-value quadrature at a grid point `x`.
///
/// Inside the box the integrand `(u(x) - u(y)) |x-y|^{-N-2s}` is summed by the
/// midpoint rule; the lattice error of the quadratic Taylor term within
/// `delta` is removed with a smooth radial cutoff, and the region outside the
/// box is integrated along rays through the box faces using `tail`.
pub fn frac_laplacian_pv(
    u: &GridFunction,
    tail: &TailModel,
    x: &[f64],
    params: &FracParams,
    delta: f64,
) -> Result<f64> {
    let defect = prepare_pv(u, tail, params, delta)?;
    pv_at(u, tail, x, params, delta, defect)
}

/// [`frac_laplacian_pv`] at many points, in parallel.
pub fn frac_laplacian_pv_many(
    u: &GridFunction,
    tail: &TailModel,
    points: &[Vec<f64>],
    params: &FracParams,
    delta: f64,
) -> Result<Vec<f64>> {
    let defect = prepare_pv(u, tail, params, delta)?;
    let vals = exec::map_range(points.len(), |i| pv_at(u, tail, &points[i], params, delta, defect));
    vals.into_iter().collect()
}

/// `delta = DEFAULT_DELTA_CELLS * h`.
pub fn default_delta(u: &GridFunction) -> f64 {
    DEFAULT_DELTA_CELLS * u.spacing()
}

fn prepare_pv(u: &GridFunction, tail: &TailModel, params: &FracParams, delta: f64) -> Result<f64> {
    if u.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: u.dim(),
        });
    }
    tail.check(u.dim())?;
    if !(delta.is_finite() && delta >= 2.0 * u.spacing()) {
        return Err(invalid("delta", format!("must be at least two cells, got {delta}")));
    }
    Ok(taylor_defect(u.dim(), params.order(), delta, u.spacing()))
}

fn pv_at(u: &GridFunction, tail: &TailModel, x: &[f64], params: &FracParams, delta: f64, defect: f64) -> Result<f64> {
    let idx = snap_to_grid(u, x)?;
    let bd = u.boundary_distance(x);
    if bd < delta {
        return Err(Error::BoundaryProximity {
            distance: bd,
            required: delta,
        });
    }
    let dim = u.dim();
    let n = u.resolution();
    let h = u.spacing();
    let vol = u.cell_volume();
    let beta = -(dim as f64) - 2.0 * params.order();
    let values = u.values();
    let xi = u.flat_index(&idx);
    let ux = values[xi];
    let rows = u.len() / n;
    let row_sums = exec::map_range(rows, |row| {
        let mut j = vec![0usize; dim];
        u.multi_index(row * n, &mut j);
        let mut lateral = 0.0;
        for k in 0..dim - 1 {
            lateral += ((j[k] as f64 - idx[k] as f64) * h).powi(2);
        }
        let mut acc = 0.0;
        for c in 0..n {
            let f = row * n + c;
            if f == xi {
                continue;
            }
            let dz = (c as f64 - idx[dim - 1] as f64) * h;
            acc += (ux - values[f]) * (lateral + dz * dz).powf(0.5 * beta);
        }
        acc
    });
    let interior = exec::pairwise_sum(&row_sums) * vol;

    let near_cells = (delta / h).ceil() as usize;
    let mut j = idx.clone();
    for k in 0..dim {
        for c in idx[k].saturating_sub(near_cells)..(idx[k] + near_cells + 1).min(n) {
            j[k] = c;
            if !values[u.flat_index(&j)].is_finite() {
                return Err(Error::NonFinite(format!("u is not finite within delta of {x:?}")));
            }
        }
        j[k] = idx[k];
    }
    let correction = 0.5 * laplacian_4th(u, &idx) / dim as f64 * defect;
    let exterior = exterior_term(u, ux, tail, x, params);
    let value = params.operator_constant() * (interior + correction + exterior);
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("(-Delta)^s u at {x:?}")));
    }
    Ok(value)
}

/// Largest padded transform, in points.
const SPECTRAL_MAX_POINTS: usize = 1 << 24;

/// `(-Delta)^s u` on the whole grid via the Fourier multiplier `|xi|^{2s}`.
///
/// `u` is zero-padded up to four times its box width (within a memory cap)
/// before periodization.
pub fn frac_laplacian_spectral(u: &GridFunction, params: &FracParams) -> Result<GridFunction> {
    let n = u.resolution();
    let padding = [4usize, 2, 1]
        .into_iter()
        .find(|p| (p * n).pow(u.dim() as u32) <= SPECTRAL_MAX_POINTS)
        .unwrap_or(1);
    frac_laplacian_spectral_padded(u, params, padding)
}

/// [`frac_laplacian_spectral`] on a box `padding` times wider than `u`'s.
pub fn frac_laplacian_spectral_padded(u: &GridFunction, params: &FracParams, padding: usize) -> Result<GridFunction> {
    if u.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: u.dim(),
        });
    }
    if padding == 0 {
        return Err(invalid("padding", "must be at least 1"));
    }
    let sup = u.lp_norm(f64::INFINITY);
    let tol = SPECTRAL_DECAY_TOLERANCE * sup.max(1.0);
    let bmax = u.boundary_max();
    if bmax > tol {
        return Err(Error::InsufficientDecay {
            boundary_max: bmax,
            tolerance: tol,
        });
    }
    let dim = u.dim();
    let n = u.resolution();
    let m = padding * n;
    let length = 2.0 * u.half_width() * padding as f64;
    let mut data = vec![Complex64::new(0.0, 0.0); m.pow(dim as u32)];
    let mut idx = vec![0usize; dim];
    let padded_flat = |idx: &[usize]| idx.iter().fold(0, |acc, &j| acc * m + j);
    for (i, v) in u.values().iter().enumerate() {
        u.multi_index(i, &mut idx);
        data[padded_flat(&idx)] = Complex64::new(*v, 0.0);
    }
    fft_nd(&mut data, m, dim, FftDirection::Forward);
    let half_s = params.order();
    let mut pidx = vec![0usize; dim];
    for (i, d) in data.iter_mut().enumerate() {
        let mut rem = i;
        for k in (0..dim).rev() {
            pidx[k] = rem % m;
            rem /= m;
        }
        let xi2: f64 = pidx
            .iter()
            .map(|&j| (2.0 * PI * signed_frequency(j, m) as f64 / length).powi(2))
            .sum();
        *d *= xi2.powf(half_s);
    }
    fft_nd(&mut data, m, dim, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    let mut out = vec![0.0; u.len()];
    for (i, o) in out.iter_mut().enumerate() {
        u.multi_index(i, &mut idx);
        *o = data[padded_flat(&idx)].re * scale;
    }
    u.with_values(out)
}

fn gradient(u: &GridFunction, idx: &[usize], axis: usize) -> f64 {
    let n = u.resolution();
    let h = u.spacing();
    let v = u.values();
    let mut j = idx.to_vec();
    let i = idx[axis];
    let (a, b, span) = if i == 0 {
        (0, 1, h)
    } else if i == n - 1 {
        (n - 2, n - 1, h)
    } else {
        (i - 1, i + 1, 2.0 * h)
    };
    j[axis] = b;
    let vb = v[u.flat_index(&j)];
    j[axis] = a;
    let va = v[u.flat_index(&j)];
    (vb - va) / span
}

/// `c_{N,s} * 1/2 int int (u(y)-u(x)) (phi(y)-phi(x)) |x-y|^{-N-2s} dx dy`.
///
/// Double midpoint sum over distinct cells, with the same near-diagonal
/// Taylor correction as [`frac_laplacian_pv`]; pairs with `y` outside the box
/// use `u_tail` and `phi = 0`.
pub fn bilinear_form(u: &GridFunction, u_tail: &TailModel, phi: &GridFunction, params: &FracParams) -> Result<f64> {
    u.check_same_geometry(phi)?;
    if u.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: u.dim(),
        });
    }
    u_tail.check(u.dim())?;
    if phi.boundary_max() != 0.0 {
        return Err(Error::Support("test function does not vanish on the box boundary".into()));
    }
    let dim = u.dim();
    let n = u.resolution();
    let h = u.spacing();
    let vol = u.cell_volume();
    let beta = -(dim as f64) - 2.0 * params.order();
    let delta = DEFAULT_DELTA_CELLS * h;
    let defect = taylor_defect(dim, params.order(), delta, h);

    // kernel by absolute offset
    let table_len = n.pow(dim as u32);
    let kernel = exec::map_range(table_len, |flat| {
        let mut rem = flat;
        let mut r2 = 0.0;
        for _ in 0..dim {
            r2 += ((rem % n) as f64 * h).powi(2);
            rem /= n;
        }
        if r2 == 0.0 {
            0.0
        } else {
            r2.powf(0.5 * beta)
        }
    });
    let uv = u.values();
    let pv = phi.values();
    let per_cell = exec::map_range(u.len(), |i| {
        let mut a = vec![0usize; dim];
        let mut b = vec![0usize; dim];
        u.multi_index(i, &mut a);
        let mut acc = 0.0;
        for j in 0..u.len() {
            let dp = pv[j] - pv[i];
            if dp == 0.0 {
                continue;
            }
            u.multi_index(j, &mut b);
            let off = a.iter().zip(&b).fold(0, |o, (x, y)| o * n + x.abs_diff(*y));
            acc += (uv[j] - uv[i]) * dp * kernel[off];
        }
        let mut grad_dot = 0.0;
        for k in 0..dim {
            let gp = gradient(phi, &a, k);
            if gp != 0.0 {
                grad_dot += gradient(u, &a, k) * gp;
            }
        }
        0.5 * acc * vol - 0.5 * grad_dot / dim as f64 * defect
    });
    let interior = exec::pairwise_sum(&per_cell) * vol;

    let support: Vec<usize> = (0..phi.len()).filter(|&i| pv[i] != 0.0).collect();
    let ext = exec::map_range(support.len(), |k| {
        let i = support[k];
        let x = u.point(i);
        pv[i] * exterior_term(u, uv[i], u_tail, &x, params)
    });
    let exterior = exec::pairwise_sum(&ext) * vol;
    Ok(params.operator_constant() * (interior + exterior))
}

/// `|B(u, phi) - int f phi|` for the bilinear form [`bilinear_form`].
pub fn check_distributional_identity(
    u: &GridFunction,
    u_tail: &TailModel,
    f: &GridFunction,
    phi: &GridFunction,
    params: &FracParams,
) -> Result<f64> {
    let form = bilinear_form(u, u_tail, phi, params)?;
    Ok((form - f.dot(phi)?).abs())
}
