//! Duality solutions: the pairing `int u g = int w dmu` against a battery of
//! test functions, the mollify-then-invert existence pipeline, duality
//! equality of two candidate solutions, and Young's convolution inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::fft::fft_nd;
use crate::grid::{distance, Ball, Field, GridFunction};
use crate::kernel::{mollify, GridSpec, MollifierProfile, MollifierSpec};
use crate::measure::AtomicMeasure;
use crate::norms::{full_sobolev_norm_on, lebesgue_norm_on, ls_slope, BallMesh};
use crate::params::FracParams;
use crate::potential::{potential_of_density, potential_on_grid};
use crate::quadrature::box_power_integral;

/// `exp(1 - 1/(1 - t^2))` on `|t| < 1`, peak one.
fn bump1(t: f64) -> f64 {
    let t2 = t * t;
    if t2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t2)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub wavevector: Vec<f64>,
    pub phase: f64,
    pub amplitude: f64,
}

/// Smooth compactly supported test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `prod_i bump((x_i - c_i) / width)`.
    Bump { center: Vec<f64>, width: f64 },
    /// `window(|x - c| / radius) * (1 + noise(x) / 2)` with `|noise| <= 1`
    /// a finite sum of plane waves.
    Noise {
        modes: Vec<Mode>,
        window_center: Vec<f64>,
        window_radius: f64,
    },
}

impl TestFunction {
    pub fn label(&self) -> String {
        match self {
            TestFunction::Bump { center, width } => format!("bump{center:?}w{width}"),
            TestFunction::Noise { modes, .. } => format!("noise{}", modes.len()),
        }
    }
}

impl Field for TestFunction {
    fn dim(&self) -> usize {
        match self {
            TestFunction::Bump { center, .. } => center.len(),
            TestFunction::Noise { window_center, .. } => window_center.len(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Bump { center, width } => {
                center.iter().zip(x).map(|(c, v)| bump1((v - c) / width)).product()
            }
            TestFunction::Noise {
                modes,
                window_center,
                window_radius,
            } => {
                let w = bump1(distance(x, window_center) / window_radius);
                if w == 0.0 {
                    return 0.0;
                }
                let noise: f64 = modes
                    .iter()
                    .map(|m| {
                        let kx: f64 = m.wavevector.iter().zip(x).map(|(k, v)| k * v).sum();
                        m.amplitude * (kx + m.phase).cos()
                    })
                    .sum();
                w * (1.0 + 0.5 * noise)
            }
        }
    }
}

/// A named, reproducible family of test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub members: Vec<TestFunction>,
}

/// Wave numbers of the noise members are at most this many cycles per unit.
const NOISE_CYCLES: f64 = 2.0;
const NOISE_MODES: usize = 6;

impl Battery {
    /// 20 functions supported in `[-0.95, 0.95]^N`: tensor bumps at the origin
    /// and at `+-0.35 e_1`, `+-0.35 e_2` with widths 0.3 and 0.6, and ten
    /// windowed low-pass random fields drawn from `seed`.
    pub fn standard(dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", "must be at least 2"));
        }
        let mut centers = vec![vec![0.0; dim]];
        for axis in 0..2 {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; dim];
                c[axis] = 0.35 * sign;
                centers.push(c);
            }
        }
        let mut members = Vec::with_capacity(20);
        for width in [0.3, 0.6] {
            for c in &centers {
                members.push(TestFunction::Bump {
                    center: c.clone(),
                    width: width / (dim as f64 / 2.0).sqrt(),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let raw: Vec<(Vec<f64>, f64, f64)> = (0..NOISE_MODES)
                .map(|_| {
                    let k: Vec<f64> = (0..dim)
                        .map(|_| 2.0 * PI * NOISE_CYCLES * rng.gen_range(-1.0..1.0) / (dim as f64).sqrt())
                        .collect();
                    (k, rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.2..1.0))
                })
                .collect();
            let total: f64 = raw.iter().map(|m| m.2).sum();
            members.push(TestFunction::Noise {
                modes: raw
                    .into_iter()
                    .map(|(wavevector, phase, a)| Mode {
                        wavevector,
                        phase,
                        amplitude: a / total,
                    })
                    .collect(),
                window_center: vec![0.0; dim],
                window_radius: 0.9,
            });
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Every member sampled on the cube `[-half_width, half_width]^N`.
    pub fn sample(&self, half_width: f64, resolution: usize) -> Result<Vec<GridFunction>> {
        self.members
            .iter()
            .map(|g| {
                let dim = g.dim();
                GridFunction::sample(g, vec![0.0; dim], half_width, resolution)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityResidualReport {
    pub test_function: String,
    pub spacing: f64,
    /// `int u g` over the cells not excised.
    pub lhs: f64,
    /// `sum_i w_i (C_{N,s} |.|^{-(N-2s)} * g)(y_i)`.
    pub rhs: f64,
    pub residual: f64,
    /// Bound on `|int u g|` over the excised cells, for `u` no larger than
    /// the matching combination of fundamental solutions.
    pub excised_bound: f64,
}

/// Cells whose centers lie within one spacing of an atom.
fn excised_cells(g: &GridFunction, mu: &AtomicMeasure) -> Vec<bool> {
    let h = g.spacing();
    let mut p = vec![0.0; g.dim()];
    (0..g.len())
        .map(|i| {
            g.point_into(i, &mut p);
            mu.atoms().iter().any(|a| distance(&p, &a.point) <= h)
        })
        .collect()
}

/// `sum u(x_k) g_k h^N` over non-excised cells with `g_k != 0`.
fn excised_pairing(u: &impl Field, g: &GridFunction, excised: &[bool]) -> Result<f64> {
    let n = g.resolution();
    let rows = g.len() / n;
    let vals = g.values();
    let sums = exec::map_range(rows, |row| {
        let mut p = vec![0.0; g.dim()];
        let mut acc = 0.0;
        for i in row * n..(row + 1) * n {
            if vals[i] == 0.0 || excised[i] {
                continue;
            }
            g.point_into(i, &mut p);
            acc += u.value(&p) * vals[i];
        }
        acc
    });
    let lhs = exec::pairwise_sum(&sums) * g.cell_volume();
    if !lhs.is_finite() {
        return Err(Error::NonFinite("pairing of u with the test function".into()));
    }
    Ok(lhs)
}

/// Residual of `int u g dx = int w dmu` for one sampled test function.
pub fn duality_residual(
    u: &impl Field,
    mu: &AtomicMeasure,
    g: &GridFunction,
    params: &FracParams,
) -> Result<DualityResidualReport> {
    for d in [u.dim(), mu.dim(), g.dim()] {
        if d != params.dim() {
            return Err(Error::DimensionMismatch {
                expected: params.dim(),
                found: d,
            });
        }
    }
    if g.boundary_max() != 0.0 {
        return Err(Error::Support("test function does not vanish on the box boundary".into()));
    }
    let excised = excised_cells(g, mu);
    let lhs = excised_pairing(u, g, &excised)?;
    let mut rhs = 0.0;
    for a in mu.atoms() {
        rhs += a.weight * potential_of_density(g, &a.point, params)?;
    }
    let h = g.spacing();
    let mut excised_bound = 0.0;
    let mut p = vec![0.0; g.dim()];
    for (i, &e) in excised.iter().enumerate() {
        if !e || g.values()[i] == 0.0 {
            continue;
        }
        g.point_into(i, &mut p);
        let lo: Vec<f64> = p.iter().map(|c| c - 0.5 * h).collect();
        let hi: Vec<f64> = p.iter().map(|c| c + 0.5 * h).collect();
        for a in mu.atoms() {
            excised_bound += g.values()[i].abs()
                * a.weight.abs()
                * params.potential_constant()
                * box_power_integral(&lo, &hi, &a.point, -params.riesz_exponent());
        }
    }
    Ok(DualityResidualReport {
        test_function: String::new(),
        spacing: h,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        excised_bound,
    })
}

/// [`duality_residual`] for every battery member sampled on
/// `[-half_width, half_width]^N` with `resolution` cells per axis.
pub fn battery_residuals(
    u: &impl Field,
    mu: &AtomicMeasure,
    battery: &Battery,
    half_width: f64,
    resolution: usize,
    params: &FracParams,
) -> Result<Vec<DualityResidualReport>> {
    let grids = battery.sample(half_width, resolution)?;
    grids
        .iter()
        .zip(&battery.members)
        .enumerate()
        .map(|(k, (g, tf))| {
            let mut r = duality_residual(u, mu, g, params)?;
            r.test_function = format!("{k:02}:{}", tf.label());
            Ok(r)
        })
        .collect()
}

/// Residual below this fraction of `|rhs|` counts as converged when fitting
/// an order.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Least-squares order of `residual ~ h^order`; infinite when the finest
/// residual is at roundoff level.
pub fn observed_order(spacings: &[f64], residuals: &[f64], rhs_scale: f64) -> f64 {
    let last = residuals[residuals.len() - 1];
    if last <= ROUNDOFF_FLOOR * rhs_scale.abs() {
        return f64::INFINITY;
    }
    let floor = f64::MIN_POSITIVE;
    let lx: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|r| r.max(floor).ln()).collect();
    ls_slope(&lx, &ly)
}

/// `int int g(y) h(x) C_{N,s} |x-y|^{-(N-2s)} dy dx` on a shared grid.
pub fn riesz_pairing(g: &GridFunction, h: &GridFunction, params: &FracParams) -> Result<f64> {
    let w = potential_on_grid(g, params)?;
    w.dot(h)
}

/// One level of the existence pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleLevel {
    pub bandwidth: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualitySchedule {
    pub levels: Vec<ScheduleLevel>,
    /// Half width of the computational cube about the origin.
    pub half_width: f64,
    pub profile: MollifierProfile,
    /// Radius of the ball `B_R` for the norms.
    pub ball_radius: f64,
    /// Lebesgue exponent of the Cauchy differences.
    pub gamma: f64,
    /// Sobolev exponents of the uniform bound.
    pub eta: f64,
    pub q: f64,
}

impl DualitySchedule {
    /// Halving bandwidths from `first` over `count` levels on one grid with
    /// `resolution` cells; `gamma = 2` and `(eta, q) = (1 - (2-2s)/q, q)`.
    pub fn halving(first: f64, count: usize, resolution: usize, half_width: f64, q: f64, params: &FracParams) -> Self {
        Self {
            levels: (0..count)
                .map(|k| ScheduleLevel {
                    bandwidth: first * 0.5f64.powi(k as i32),
                    resolution,
                })
                .collect(),
            half_width,
            profile: MollifierProfile::GaussianTruncated,
            ball_radius: 1.0,
            gamma: 2.0,
            eta: 1.0 - (2.0 - 2.0 * params.order()) / q,
            q,
        }
    }

    fn validate(&self, params: &FracParams) -> Result<()> {
        if self.levels.len() < 3 {
            return Err(Error::Schedule("at least three levels are required".into()));
        }
        if self.levels.windows(2).any(|w| w[1].bandwidth >= w[0].bandwidth) {
            return Err(Error::Schedule("bandwidths must decrease".into()));
        }
        if !(self.ball_radius > 0.0 && self.ball_radius < self.half_width) {
            return Err(Error::Schedule("the ball must lie inside the box".into()));
        }
        let gamma_max = 1.0 + 2.0 / params.riesz_exponent();
        if !(self.gamma >= 1.0 && self.gamma < gamma_max) {
            return Err(Error::Exponent(format!(
                "Cauchy exponent {} must lie in [1, {gamma_max})",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub bandwidth: f64,
    pub spacing: f64,
    /// `||u_n - u_{n-1}||_{L^gamma(B_R)}`; absent on the first level.
    pub cauchy_difference: Option<f64>,
    /// `||u_n||_{W^{eta,q}(B_R)}`.
    pub sobolev_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualitySolution {
    /// Finest-level approximation.
    pub u: GridFunction,
    pub levels: Vec<LevelReport>,
    /// Residuals of the finest level against the battery.
    pub battery: Vec<DualityResidualReport>,
    /// Set when the Cauchy differences fail to decrease.
    pub warning: Option<String>,
}

impl DualitySolution {
    pub fn cauchy_differences(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.cauchy_difference).collect()
    }

    pub fn cauchy_monotone(&self) -> bool {
        self.cauchy_differences()
            .windows(2)
            .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
    }

    /// `max / min - 1` of the Sobolev norms over levels with bandwidth at
    /// most `R / 10`.
    pub fn sobolev_spread(&self, ball_radius: f64) -> f64 {
        let v: Vec<f64> = self
            .levels
            .iter()
            .filter(|l| l.bandwidth <= ball_radius / 10.0)
            .map(|l| l.sobolev_norm)
            .collect();
        if v.is_empty() {
            return 0.0;
        }
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        if min > 0.0 {
            max / min - 1.0
        } else if max == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Mesh for norms of the approximations on `B_R`: log-polar about the
/// origin down to a quarter of the finest bandwidth (`N = 2, 3`), otherwise
/// Cartesian at the finest grid spacing.
fn pipeline_mesh(schedule: &DualitySchedule, dim: usize) -> Result<BallMesh> {
    let ball = Ball::centered(dim, schedule.ball_radius)?;
    let finest = schedule.levels[schedule.levels.len() - 1];
    if (2..=3).contains(&dim) {
        let per_octave = if dim == 2 { 8 } else { 3 };
        BallMesh::log_polar(&ball, per_octave, 0.25 * finest.bandwidth)
    } else {
        let h = 2.0 * schedule.half_width / finest.resolution as f64;
        BallMesh::cartesian(&ball, (2.0 * schedule.ball_radius / h).round() as usize, None)
    }
}

/// Mollify `mu` at each bandwidth, take the Riesz potential on the grid,
/// and report convergence, uniform bounds and the battery residuals of the
/// finest level.
pub fn solve_duality(
    mu: &AtomicMeasure,
    params: &FracParams,
    schedule: &DualitySchedule,
    battery: &Battery,
) -> Result<DualitySolution> {
    schedule.validate(params)?;
    let dim = params.dim();
    if mu.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: mu.dim(),
        });
    }
    let mesh = pipeline_mesh(schedule, dim)?;
    let mut levels = Vec::with_capacity(schedule.levels.len());
    let mut prev: Option<GridFunction> = None;
    for lvl in &schedule.levels {
        let spec = MollifierSpec::new(lvl.bandwidth, schedule.profile)?;
        let grid = GridSpec::centered(dim, schedule.half_width, lvl.resolution);
        let f = mollify(mu, &spec, &grid)?;
        let u = potential_on_grid(&f, params)?;
        let cauchy_difference = match &prev {
            None => None,
            Some(p) => Some(grid_difference_norm(&u, p, schedule.gamma, schedule.ball_radius)?),
        };
        let sobolev_norm = full_sobolev_norm_on(&u, schedule.eta, schedule.q, &mesh)?;
        levels.push(LevelReport {
            bandwidth: lvl.bandwidth,
            spacing: u.spacing(),
            cauchy_difference,
            sobolev_norm,
        });
        prev = Some(u);
    }
    let u = prev.expect("at least three levels");
    let finest = schedule.levels[schedule.levels.len() - 1].resolution;
    let battery = battery_residuals(&u, mu, battery, schedule.half_width, finest, params)?;
    let mut solution = DualitySolution {
        u,
        levels,
        battery,
        warning: None,
    };
    if !solution.cauchy_monotone() {
        solution.warning = Some(format!(
            "Cauchy differences do not decrease: {:?}",
            solution.cauchy_differences()
        ));
    }
    Ok(solution)
}

/// `||a - b||_{L^gamma(B_R)}` on the cells of the finer grid, with the
/// coarser grid interpolated.
fn grid_difference_norm(a: &GridFunction, b: &GridFunction, gamma: f64, radius: f64) -> Result<f64> {
    let (fine, coarse) = if a.resolution() >= b.resolution() { (a, b) } else { (b, a) };
    let same = fine.check_same_geometry(coarse).is_ok();
    let n = fine.resolution();
    let rows = fine.len() / n;
    let center = vec![0.0; fine.dim()];
    let sums = exec::map_range(rows, |row| {
        let mut p = vec![0.0; fine.dim()];
        let mut acc = 0.0;
        for i in row * n..(row + 1) * n {
            fine.point_into(i, &mut p);
            if distance(&p, &center) >= radius {
                continue;
            }
            let c = if same { coarse.values()[i] } else { coarse.interpolate(&p) };
            acc += (fine.values()[i] - c).abs().powf(gamma);
        }
        acc
    });
    Ok((exec::pairwise_sum(&sums) * fine.cell_volume()).powf(1.0 / gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// `max_g |int (u1 - u2) g|`.
    pub max_difference: f64,
    /// `||u1 - u2||_{L^1(ball)}`.
    pub l1_difference: f64,
    pub tolerance: f64,
    pub duality_equal: bool,
}

/// Relative tolerance of [`uniqueness_check`], per unit `L^1` mass of the
/// test function.
pub const UNIQUENESS_TOLERANCE: f64 = 1e-2;

/// Compares two candidate solutions through their pairings with the battery
/// sampled on `[-half_width, half_width]^N` (cells within one spacing of an
/// atom of `mu` excised).
pub fn uniqueness_check(
    u1: &impl Field,
    u2: &impl Field,
    mu: &AtomicMeasure,
    battery: &Battery,
    half_width: f64,
    resolution: usize,
) -> Result<UniquenessReport> {
    let grids = battery.sample(half_width, resolution)?;
    let mut max_difference: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for g in &grids {
        let excised = excised_cells(g, mu);
        let a = excised_pairing(u1, g, &excised)?;
        let b = excised_pairing(u2, g, &excised)?;
        max_difference = max_difference.max((a - b).abs());
        scale = scale.max(g.l1_mass());
    }
    let dim = u1.dim();
    let ball = Ball::centered(dim, half_width)?;
    let mesh = BallMesh::cartesian(&ball, resolution, None)?;
    let diff = crate::grid::FnField::new(dim, |x: &[f64]| {
        if mu.atoms().iter().any(|a| distance(x, &a.point) <= 2.0 * half_width / resolution as f64) {
            0.0
        } else {
            u1.value(x) - u2.value(x)
        }
    });
    let l1_difference = lebesgue_norm_on(&diff, 1.0, &mesh, 0.0)?;
    let tolerance = UNIQUENESS_TOLERANCE * scale;
    Ok(UniquenessReport {
        max_difference,
        l1_difference,
        tolerance,
        duality_equal: max_difference <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungCheck {
    pub r: f64,
    /// `||f * g||_{L^r}`.
    pub lhs: f64,
    /// `||f||_{L^p} ||g||_{L^q}`.
    pub rhs: f64,
    /// `lhs / rhs`, zero when `rhs` vanishes.
    pub ratio: f64,
}

/// Slack allowed in Young's inequality for quadrature error.
pub const YOUNG_TOLERANCE: f64 = 2e-2;

/// `1 / (1/p + 1/q - 1)`, infinite when `1/p + 1/q = 1`.
pub fn young_exponent(p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::Exponent(format!("p = {p} and q = {q} must be at least 1")));
    }
    let s = 1.0 / p + 1.0 / q - 1.0;
    if s < -1e-15 {
        return Err(Error::Exponent(format!("1/p + 1/q = {} is below 1", 1.0 / p + 1.0 / q)));
    }
    Ok(if s <= 1e-15 { f64::INFINITY } else { 1.0 / s })
}

/// Resample onto a cube of spacing `h` covering the same box.
fn resample(f: &GridFunction, h: f64) -> Result<GridFunction> {
    if (f.spacing() - h).abs() <= 1e-12 * h {
        return Ok(f.clone());
    }
    let n = (2.0 * f.half_width() / h).ceil() as usize;
    GridFunction::from_fn(f.center().to_vec(), 0.5 * n as f64 * h, n, |x| f.interpolate(x))
}

/// Full discrete convolution `(f * g)(x) = sum_y f(y) g(x - y) h^N` on a
/// common spacing (the finer of the two).
pub fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let h = f.spacing().min(g.spacing());
    let f = resample(f, h)?;
    let g = resample(g, h)?;
    let dim = f.dim();
    let (nf, ng) = (f.resolution(), g.resolution());
    let m = nf + ng - 1;
    let total = m.pow(dim as u32);
    let embed = |src: &GridFunction| {
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        let mut idx = vec![0usize; dim];
        for (i, v) in src.values().iter().enumerate() {
            src.multi_index(i, &mut idx);
            data[idx.iter().fold(0, |acc, &j| acc * m + j)] = Complex64::new(*v, 0.0);
        }
        data
    };
    let mut a = embed(&f);
    let mut b = embed(&g);
    fft_nd(&mut a, m, dim, FftDirection::Forward);
    fft_nd(&mut b, m, dim, FftDirection::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_nd(&mut a, m, dim, FftDirection::Inverse);
    let scale = f.cell_volume() / total as f64;
    let center: Vec<f64> = f.center().iter().zip(g.center()).map(|(x, y)| x + y).collect();
    GridFunction::new(center, 0.5 * m as f64 * h, m, a.iter().map(|c| c.re * scale).collect())
}

/// `||f * g||_{L^r}` against `||f||_{L^p} ||g||_{L^q}`.
pub fn young_check(f: &GridFunction, g: &GridFunction, p: f64, q: f64) -> Result<YoungCheck> {
    let r = young_exponent(p, q)?;
    let conv = convolve(f, g)?;
    let h = conv.spacing();
    let f = resample(f, h)?;
    let g = resample(g, h)?;
    let lhs = conv.lp_norm(r);
    let rhs = f.lp_norm(p) * g.lp_norm(q);
    Ok(YoungCheck {
        r,
        lhs,
        rhs,
        ratio: if rhs == 0.0 { 0.0 } else { lhs / rhs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::norm;
    use crate::potential::FundamentalSolution;

    fn p2() -> FracParams {
        FracParams::new(2, 0.75).unwrap()
    }

    #[test]
    fn battery_is_supported_and_positive() {
        let b = Battery::standard(2, 7).unwrap();
        assert_eq!(b.len(), 20);
        for g in &b.members {
            assert!(g.value(&[0.99, 0.0]) == 0.0 && g.value(&[0.0, -0.99]) == 0.0);
        }
        let grids = b.sample(1.0, 64).unwrap();
        for g in &grids {
            assert_eq!(g.boundary_max(), 0.0);
            assert!(g.values().iter().all(|v| *v >= 0.0));
            assert!(g.integral() > 0.0);
        }
        assert_eq!(Battery::standard(2, 7).unwrap(), b);
        assert_ne!(Battery::standard(2, 8).unwrap(), b);
    }

    #[test]
    fn zero_test_function() {
        let par = p2();
        let mu = AtomicMeasure::dirac(vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let g = GridFunction::zeros(vec![0.0, 0.0], 1.0, 32).unwrap();
        let u = FundamentalSolution::new(par);
        let r = duality_residual(&u, &mu, &g, &par).unwrap();
        assert_eq!((r.lhs, r.rhs, r.residual), (0.0, 0.0, 0.0));
        let wide = GridFunction::from_fn(vec![0.0, 0.0], 1.0, 32, |_| 1.0).unwrap();
        assert!(matches!(duality_residual(&u, &mu, &wide, &par), Err(Error::Support(_))));
    }

    #[test]
    fn fundamental_solution_residual_converges() {
        let par = p2();
        let mu = AtomicMeasure::dirac(vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let u = FundamentalSolution::new(par);
        let g = TestFunction::Bump {
            center: vec![0.1, 0.0],
            width: 0.5,
        };
        let res: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let gg = GridFunction::sample(&g, vec![0.0, 0.0], 1.0, n).unwrap();
                duality_residual(&u, &mu, &gg, &par).unwrap().residual
            })
            .collect();
        let order = observed_order(&[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0], &res, 1.0);
        assert!(order >= 0.8, "{res:?}");
    }

    #[test]
    fn riesz_pairing_is_symmetric() {
        let par = FracParams::new(3, 0.6).unwrap();
        let a = GridFunction::from_fn(vec![0.0; 3], 1.0, 16, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * 4.0).exp()).unwrap();
        let b = GridFunction::from_fn(vec![0.0; 3], 1.0, 16, |x| (x[0] - 0.2).max(0.0) * (1.0 - x[1] * x[1])).unwrap();
        let ab = riesz_pairing(&a, &b, &par).unwrap();
        let ba = riesz_pairing(&b, &a, &par).unwrap();
        assert!((ab - ba).abs() <= 1e-12 * ab.abs());
    }

    #[test]
    fn young_exponents() {
        assert_eq!(young_exponent(1.0, 2.0).unwrap(), 2.0);
        assert!((young_exponent(4.0 / 3.0, 4.0 / 3.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(young_exponent(2.0, 2.0).unwrap(), f64::INFINITY);
        assert!(matches!(young_exponent(3.0, 3.0), Err(Error::Exponent(_))));
    }

    #[test]
    fn young_l1_equality_and_gaussian_strictness() {
        let f = GridFunction::from_fn(vec![0.0, 0.0], 1.0, 32, |x| if x[0].abs() < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let c = young_check(&f, &f, 1.0, 1.0).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-12, "{c:?}");
        let gauss = GridFunction::from_fn(vec![0.0, 0.0], 4.0, 64, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let c = young_check(&gauss, &gauss, 4.0 / 3.0, 4.0 / 3.0).unwrap();
        assert!(c.ratio < 0.95, "{c:?}");
        let coarse = GridFunction::from_fn(vec![0.3, 0.0], 0.5, 10, |x| 1.0 + x[0]).unwrap();
        let c = young_check(&coarse, &f, 1.0, 2.0).unwrap();
        assert!(c.ratio <= 1.0 + YOUNG_TOLERANCE);
    }

    #[test]
    fn convolution_of_boxes_has_product_mass() {
        let f = GridFunction::from_fn(vec![0.5, 0.0], 1.0, 20, |x| if norm(x) < 2.0 { 2.0 } else { 0.0 }).unwrap();
        let g = GridFunction::from_fn(vec![0.0, -0.25], 0.5, 10, |_| 1.0).unwrap();
        let c = convolve(&f, &g).unwrap();
        assert!((c.integral() - f.integral() * g.integral()).abs() < 1e-12 * c.integral());
        assert_eq!(c.resolution(), 29);
        assert!((c.half_width() - (1.5 - 0.05)).abs() < 1e-12);
    }
}
