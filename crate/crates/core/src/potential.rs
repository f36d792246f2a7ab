//! Riesz potentials `w = C_{N,s} |.|^{-(N-2s)} * f` of atomic measures and
//! grid densities, and the checks on their size, continuity and decay.

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::exec;
use crate::fft::fft_nd;
use crate::grid::{distance, Ball, Field, GridFunction};
use crate::kernel::riesz_kernel_radial;
use crate::measure::AtomicMeasure;
use crate::params::FracParams;
use crate::quadrature::{ball_power_integral, box_power_integral, sphere_points};

/// Closest an evaluation point may come to an atom.
pub const ATOM_TOLERANCE: f64 = 1e-12;

/// `C_{N,s} sum_i w_i |x - y_i|^{-(N-2s)}`, in closed form.
pub fn potential_of_measure(mu: &AtomicMeasure, x: &[f64], params: &FracParams) -> Result<f64> {
    check_dim(params, x.len())?;
    check_dim(params, mu.dim())?;
    let mut acc = 0.0;
    for a in mu.atoms() {
        let r = distance(x, &a.point);
        if r < ATOM_TOLERANCE {
            return Err(Error::SingularPoint { distance: r });
        }
        acc += a.weight * riesz_kernel_radial(r, params);
    }
    Ok(acc)
}

fn check_dim(params: &FracParams, found: usize) -> Result<()> {
    if found != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found,
        });
    }
    Ok(())
}

/// Cells whose centers lie within this many spacings of the evaluation point
/// (in every coordinate) are integrated exactly against the kernel.
const NEAR_CELLS: f64 = 1.5;

/// Exact kernel integral over the cell `[center - h/2, center + h/2]`.
fn exact_cell_weight(cell_center: &[f64], h: f64, x: &[f64], params: &FracParams) -> f64 {
    let lo: Vec<f64> = cell_center.iter().map(|c| c - 0.5 * h).collect();
    let hi: Vec<f64> = cell_center.iter().map(|c| c + 0.5 * h).collect();
    params.potential_constant() * box_power_integral(&lo, &hi, x, -params.riesz_exponent())
}

/// Riesz potential of a grid density at an arbitrary point.
///
/// Midpoint rule over the cells, except that cells adjacent to `x` are
/// integrated exactly against the kernel with the density frozen at the
/// cell value. This removes the singular cell entirely.
pub fn potential_of_density(f: &GridFunction, x: &[f64], params: &FracParams) -> Result<f64> {
    check_dim(params, x.len())?;
    check_dim(params, f.dim())?;
    Ok(density_potential_unchecked(f, x, params))
}

fn density_potential_unchecked(f: &GridFunction, x: &[f64], params: &FracParams) -> f64 {
    let dim = f.dim();
    let n = f.resolution();
    let h = f.spacing();
    let vol = f.cell_volume();
    let near = NEAR_CELLS * h * (1.0 + 1e-9);
    let values = f.values();
    let rows = f.len() / n;
    let row_sums = exec::map_range(rows, |row| {
        let mut p = vec![0.0; dim];
        f.point_into(row * n, &mut p);
        // all but the last coordinate are fixed along the row
        let mut lateral = 0.0;
        let mut lateral_near = true;
        for k in 0..dim - 1 {
            let d = p[k] - x[k];
            lateral += d * d;
            lateral_near &= d.abs() <= near;
        }
        let mut acc = 0.0;
        let base = row * n;
        for j in 0..n {
            let v = values[base + j];
            if v == 0.0 {
                continue;
            }
            let z = f.coordinate(dim - 1, j);
            let d = z - x[dim - 1];
            if lateral_near && d.abs() <= near {
                p[dim - 1] = z;
                acc += v * exact_cell_weight(&p, h, x, params);
            } else {
                acc += v * vol * riesz_kernel_radial((lateral + d * d).sqrt(), params);
            }
        }
        acc
    });
    exec::pairwise_sum(&row_sums)
}

/// Riesz potential of `f` at every cell center of its own grid, by FFT
/// convolution with the discrete kernel used in [`potential_of_density`].
pub fn potential_on_grid(f: &GridFunction, params: &FracParams) -> Result<GridFunction> {
    check_dim(params, f.dim())?;
    let dim = f.dim();
    let n = f.resolution();
    let m = 2 * n;
    let h = f.spacing();
    let total = m.pow(dim as u32);
    let origin = vec![0.0; dim];

    let kernel_vals = exec::map_range(total, |flat| {
        let mut rem = flat;
        let mut offset = vec![0.0; dim];
        let mut near = true;
        let mut wrapped = false;
        for k in (0..dim).rev() {
            let j = rem % m;
            rem /= m;
            let o = if j < n { j as i64 } else { j as i64 - m as i64 };
            if o == n as i64 || o == -(n as i64) {
                wrapped = true;
            }
            near &= o.abs() <= 1;
            offset[k] = o as f64 * h;
        }
        if wrapped {
            return 0.0;
        }
        if near {
            exact_cell_weight(&offset, h, &origin, params)
        } else {
            f.cell_volume() * riesz_kernel_radial(crate::grid::norm(&offset), params)
        }
    });
    let mut kernel: Vec<Complex64> = kernel_vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect();

    let mut data = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; dim];
    for (i, v) in f.values().iter().enumerate() {
        f.multi_index(i, &mut idx);
        let flat = idx.iter().fold(0, |acc, &j| acc * m + j);
        data[flat] = Complex64::new(*v, 0.0);
    }
    fft_nd(&mut kernel, m, dim, FftDirection::Forward);
    fft_nd(&mut data, m, dim, FftDirection::Forward);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k;
    }
    fft_nd(&mut data, m, dim, FftDirection::Inverse);
    let scale = 1.0 / total as f64;
    let mut out = vec![0.0; f.len()];
    for (i, o) in out.iter_mut().enumerate() {
        f.multi_index(i, &mut idx);
        let flat = idx.iter().fold(0, |acc, &j| acc * m + j);
        *o = data[flat].re * scale;
    }
    f.with_values(out)
}

/// Source of a Riesz potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Measure(AtomicMeasure),
    Density(GridFunction),
}

impl Source {
    pub fn dim(&self) -> usize {
        match self {
            Source::Measure(m) => m.dim(),
            Source::Density(g) => g.dim(),
        }
    }

    /// A ball containing the support.
    pub fn support_ball(&self) -> Ball {
        match self {
            Source::Measure(m) => Ball::centered(m.dim(), m.support_radius()).expect("positive radius"),
            Source::Density(g) => {
                let center = g.center().to_vec();
                let half_diag = 0.5 * g.spacing() * (g.dim() as f64).sqrt();
                let mut r: f64 = 0.0;
                let mut p = vec![0.0; g.dim()];
                for (i, v) in g.values().iter().enumerate() {
                    if *v != 0.0 {
                        g.point_into(i, &mut p);
                        r = r.max(distance(&p, &center) + half_diag);
                    }
                }
                Ball::new(center, r.max(half_diag)).expect("positive radius")
            }
        }
    }

    pub fn evaluate(&self, x: &[f64], params: &FracParams) -> Result<f64> {
        match self {
            Source::Measure(m) => potential_of_measure(m, x, params),
            Source::Density(g) => potential_of_density(g, x, params),
        }
    }
}

/// A Riesz potential viewed as a [`Field`], with an optional memo table.
///
/// The cache is a mutex-guarded map with insert-if-absent semantics, so
/// concurrent evaluation is safe and always returns the recomputable value.
pub struct PotentialField {
    source: Source,
    params: FracParams,
    cache: Option<Mutex<HashMap<Vec<u64>, f64>>>,
}

impl PotentialField {
    pub fn new(source: Source, params: FracParams) -> Result<Self> {
        check_dim(&params, source.dim())?;
        Ok(Self {
            source,
            params,
            cache: None,
        })
    }

    pub fn cached(mut self) -> Self {
        self.cache = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn cache_len(&self) -> usize {
        self.cache
            .as_ref()
            .map(|c| c.lock().expect("cache poisoned").len())
            .unwrap_or(0)
    }

    /// Value at `x`; `+-inf` at an atom (sign of the atom weight).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let compute = || match self.source.evaluate(x, &self.params) {
            Ok(v) => v,
            Err(_) => self.singular_value(x),
        };
        match &self.cache {
            None => compute(),
            Some(cache) => {
                let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                if let Some(v) = cache.lock().expect("cache poisoned").get(&key) {
                    return *v;
                }
                let v = compute();
                *cache.lock().expect("cache poisoned").entry(key).or_insert(v)
            }
        }
    }

    fn singular_value(&self, x: &[f64]) -> f64 {
        if let Source::Measure(m) = &self.source {
            let w: f64 = m
                .atoms()
                .iter()
                .filter(|a| distance(x, &a.point) < ATOM_TOLERANCE)
                .map(|a| a.weight)
                .sum();
            return if w >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        f64::NAN
    }
}

impl Field for PotentialField {
    fn dim(&self) -> usize {
        self.params.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }
}

/// The fundamental solution `weight * C_{N,s} |x - center|^{-(N-2s)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolution {
    params: FracParams,
    center: Vec<f64>,
    weight: f64,
}

impl FundamentalSolution {
    pub fn new(params: FracParams) -> Self {
        Self {
            center: vec![0.0; params.dim()],
            params,
            weight: 1.0,
        }
    }

    pub fn at(params: FracParams, center: Vec<f64>, weight: f64) -> Result<Self> {
        check_dim(&params, center.len())?;
        Ok(Self {
            params,
            center,
            weight,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl Field for FundamentalSolution {
    fn dim(&self) -> usize {
        self.params.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.weight * riesz_kernel_radial(distance(x, &self.center), &self.params)
    }
}

/// Outcome of the Hoelder-explicit sup bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinftyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub const LINFTY_TOLERANCE: f64 = 1e-2;

/// Checks `max |w| <= C_{N,s} ||f||_sigma sup_x (int_{B_R} |x-y|^{-(N-2s) sigma'} dy)^{1/sigma'}`
/// over the sample points, for `f` supported in `support`.
pub fn check_linfty_bound(
    f: &GridFunction,
    sigma: f64,
    params: &FracParams,
    sample_points: &[Vec<f64>],
    support: &Ball,
) -> Result<LinftyCheck> {
    check_dim(params, f.dim())?;
    let n = params.dim() as f64;
    let threshold = n / (2.0 * params.order());
    if !(sigma > threshold) || !sigma.is_finite() {
        return Err(Error::Exponent(format!(
            "sigma = {sigma} must exceed N/(2s) = {threshold}"
        )));
    }
    let half_diag = 0.5 * f.spacing() * n.sqrt();
    let mut p = vec![0.0; f.dim()];
    for (i, v) in f.values().iter().enumerate() {
        if *v != 0.0 {
            f.point_into(i, &mut p);
            if distance(&p, support.center()) > support.radius() + half_diag {
                return Err(Error::Support(format!(
                    "density is nonzero at {p:?}, outside the declared support ball"
                )));
            }
        }
    }
    let sigma_dual = sigma / (sigma - 1.0);
    let beta = params.riesz_exponent() * sigma_dual;
    let norm_f = f.lp_norm(sigma);
    let per_point = exec::map_range(sample_points.len(), |i| {
        let x = &sample_points[i];
        let w = density_potential_unchecked(f, x, params).abs();
        let j = ball_power_integral(support.center(), support.radius(), x, -beta);
        (w, j.powf(1.0 / sigma_dual))
    });
    let lhs = per_point.iter().fold(0.0f64, |m, (w, _)| m.max(*w));
    let holder = per_point.iter().fold(0.0f64, |m, (_, j)| m.max(*j));
    let rhs = params.potential_constant() * norm_f * holder;
    Ok(LinftyCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + LINFTY_TOLERANCE),
    })
}

/// Number of sphere samples for sup estimates.
pub const SPHERE_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `(radius, sup |w| on the sampled sphere)`.
    pub entries: Vec<(f64, f64)>,
    /// `sup_0 * radius_0^{N-2s}`, fitted at the first radius.
    pub fitted_constant: f64,
    /// Non-increasing beyond twice the support radius.
    pub monotone: bool,
    /// `sup <= fitted_constant * radius^{-(N-2s)} (1 + 1e-2)` at every radius.
    pub power_bound: bool,
}

impl DecayProfile {
    /// `sup(2r)/sup(r)` for consecutive radii that double, paired with `r`.
    pub fn halving_ratios(&self) -> Vec<(f64, f64)> {
        self.entries
            .windows(2)
            .filter(|w| (w[1].0 / w[0].0 - 2.0).abs() < 1e-12)
            .map(|w| (w[0].0, if w[0].1 > 0.0 { w[1].1 / w[0].1 } else { 0.0 }))
            .collect()
    }
}

/// Sup of `|w|` on spheres of the given radii about the support center.
pub fn check_decay(source: &Source, params: &FracParams, radii: &[f64], seed: u64) -> Result<DecayProfile> {
    check_dim(params, source.dim())?;
    if radii.is_empty() {
        return Err(Error::Schedule("no radii given".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Schedule("radii must be strictly increasing".into()));
    }
    let support = source.support_ball();
    if radii[0] <= support.radius() {
        return Err(Error::Schedule(format!(
            "radius {} does not exceed the support radius {}",
            radii[0],
            support.radius()
        )));
    }
    let dirs = sphere_points(params.dim(), SPHERE_SAMPLES, seed);
    let mut entries = Vec::with_capacity(radii.len());
    for &rho in radii {
        let vals = exec::map_range(dirs.len(), |i| {
            let x: Vec<f64> = dirs[i]
                .iter()
                .zip(support.center())
                .map(|(d, c)| c + rho * d)
                .collect();
            match source {
                Source::Measure(m) => potential_of_measure(m, &x, params).map(f64::abs),
                Source::Density(g) => Ok(density_potential_unchecked(g, &x, params).abs()),
            }
        });
        let mut sup: f64 = 0.0;
        for v in vals {
            sup = sup.max(v?);
        }
        entries.push((rho, sup));
    }
    let a = params.riesz_exponent();
    let fitted_constant = entries[0].1 * entries[0].0.powf(a);
    let monotone = entries
        .windows(2)
        .filter(|w| w[0].0 >= 2.0 * support.radius())
        .all(|w| w[1].1 <= w[0].1);
    let power_bound = entries
        .iter()
        .all(|(r, v)| *v <= fitted_constant * r.powf(-a) * (1.0 + 1e-2) + f64::MIN_POSITIVE);
    Ok(DecayProfile {
        entries,
        fitted_constant,
        monotone,
        power_bound,
    })
}
