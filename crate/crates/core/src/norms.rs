//! Local Lebesgue norms, Gagliardo seminorms, the Sobolev embedding ratio and
//! excision sweeps that classify whether a norm of a singular field is finite.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::grid::{distance, Ball, ExponentSpec, Field};
use crate::quadrature::gauss_legendre;

/// Increment decay rate below which an excision sweep is flagged divergent.
pub const DIVERGENCE_RATE: f64 = 0.02;

/// Default radial cells per octave of the log-polar mesh.
pub const DEFAULT_PER_OCTAVE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    Cartesian { resolution: usize },
    LogPolar { per_octave: usize },
}

/// Quadrature nodes on a ball: midpoints of cells with exact cell volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct BallMesh {
    ball: Ball,
    singular: Vec<f64>,
    kind: MeshKind,
    inner_radius: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
    sizes: Vec<f64>,
    radii: Vec<f64>,
    lattice: Option<Lattice>,
}

#[derive(Debug, Clone, PartialEq)]
struct Lattice {
    n: usize,
    h: f64,
    index: Vec<usize>,
}

impl BallMesh {
    /// Cells of the `resolution^N` grid on the bounding cube whose centers
    /// lie in the ball. Excision is measured from `singular` (default: the
    /// ball center).
    pub fn cartesian(ball: &Ball, resolution: usize, singular: Option<Vec<f64>>) -> Result<Self> {
        if resolution < 2 {
            return Err(invalid("resolution", "must be at least 2"));
        }
        let dim = ball.dim();
        let singular = singular.unwrap_or_else(|| ball.center().to_vec());
        if singular.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: singular.len(),
            });
        }
        let n = resolution;
        let h = 2.0 * ball.radius() / n as f64;
        let total = n
            .checked_pow(dim as u32)
            .ok_or_else(|| invalid("resolution", "grid too large"))?;
        let mut points = Vec::new();
        let mut index = Vec::new();
        let mut p = vec![0.0; dim];
        for flat in 0..total {
            let mut rem = flat;
            for k in (0..dim).rev() {
                p[k] = ball.center()[k] - ball.radius() + (rem % n) as f64 * h + 0.5 * h;
                rem /= n;
            }
            if ball.contains(&p) {
                points.extend_from_slice(&p);
                index.push(flat);
            }
        }
        let m = index.len();
        let radii = (0..m).map(|i| distance(&points[i * dim..(i + 1) * dim], &singular)).collect();
        Ok(Self {
            ball: ball.clone(),
            singular,
            kind: MeshKind::Cartesian { resolution },
            inner_radius: 0.0,
            points,
            weights: vec![h.powi(dim as i32); m],
            sizes: vec![h; m],
            radii,
            lattice: Some(Lattice { n, h, index }),
        })
    }

    /// Log-polar cells about the ball center covering `B_R \ B_inner`, with
    /// radial edges at `R 2^{-k/per_octave}` and near-square angular cells.
    /// Available for `N = 2, 3`.
    pub fn log_polar(ball: &Ball, per_octave: usize, inner_radius: f64) -> Result<Self> {
        let dim = ball.dim();
        if !(2..=3).contains(&dim) {
            return Err(Error::Unsupported(format!("log-polar mesh in dimension {dim}")));
        }
        if per_octave == 0 {
            return Err(invalid("per_octave", "must be positive"));
        }
        let r_out = ball.radius();
        if !(inner_radius > 0.0 && inner_radius < r_out) {
            return Err(invalid("inner_radius", format!("must lie in (0, {r_out})")));
        }
        let m = per_octave as f64;
        let shells = (m * (r_out / inner_radius).log2() - 1e-9).ceil() as usize;
        let dlog = std::f64::consts::LN_2 / m;
        let c = ball.center();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut sizes = Vec::new();
        let mut radii = Vec::new();
        // angular cells on the unit sphere: (direction, measure)
        let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
        if dim == 2 {
            let count = (2.0 * PI / dlog).ceil() as usize;
            let dt = 2.0 * PI / count as f64;
            for a in 0..count {
                let t = (a as f64 + 0.5) * dt;
                dirs.push((vec![t.cos(), t.sin()], dt));
            }
        } else {
            let rings = (PI / dlog).ceil() as usize;
            let dth = PI / rings as f64;
            for b in 0..rings {
                let (t0, t1) = (b as f64 * dth, (b + 1) as f64 * dth);
                let tm = 0.5 * (t0 + t1);
                let count = ((2.0 * PI * tm.sin() / dlog).ceil() as usize).max(4);
                let dp = 2.0 * PI / count as f64;
                let area = (t0.cos() - t1.cos()) * dp;
                for a in 0..count {
                    let ph = (a as f64 + 0.5) * dp;
                    dirs.push((vec![tm.sin() * ph.cos(), tm.sin() * ph.sin(), tm.cos()], area));
                }
            }
        }
        let nd = dim as i32;
        for k in 0..shells {
            let hi = r_out * (-(k as f64) * dlog).exp();
            let lo = r_out * (-((k + 1) as f64) * dlog).exp();
            let rm = (hi * lo).sqrt();
            let radial = (hi.powi(nd) - lo.powi(nd)) / dim as f64;
            for (d, area) in &dirs {
                for j in 0..dim {
                    points.push(c[j] + rm * d[j]);
                }
                let w = radial * area;
                weights.push(w);
                sizes.push(w.powf(1.0 / dim as f64));
                radii.push(rm);
            }
        }
        Ok(Self {
            ball: ball.clone(),
            singular: c.to_vec(),
            kind: MeshKind::LogPolar { per_octave },
            inner_radius: r_out * (-(shells as f64) * dlog).exp(),
            points,
            weights,
            sizes,
            radii,
            lattice: None,
        })
    }

    /// Cartesian mesh with 64 cells per axis in 2D, 24 in 3D, 10 beyond.
    pub fn default_for(ball: &Ball) -> Result<Self> {
        let res = match ball.dim() {
            2 => 64,
            3 => 24,
            _ => 10,
        };
        Self::cartesian(ball, res, None)
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn singular_point(&self) -> &[f64] {
        &self.singular
    }

    /// Radius of the uncovered core about the singular point (zero for
    /// Cartesian meshes).
    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Total measure of the nodes.
    pub fn volume(&self) -> f64 {
        exec::pairwise_sum(&self.weights)
    }

    /// Smallest excision radius the mesh resolves with two cells.
    pub fn min_excision(&self) -> f64 {
        match &self.lattice {
            Some(l) => 2.0 * l.h,
            None => self.inner_radius,
        }
    }

    /// For each node, the first level of the decreasing `levels` at which it
    /// lies outside the excision ball.
    fn first_levels(&self, levels: &[f64]) -> Vec<Option<usize>> {
        self.radii
            .iter()
            .map(|&r| levels.iter().position(|&e| r >= e))
            .collect()
    }
}

fn check_levels(levels: &[f64], radius: f64) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Schedule("no excision radii".into()));
    }
    if levels.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Schedule("excision radii must be strictly decreasing".into()));
    }
    if !(levels[0] < radius) || !(levels[levels.len() - 1] >= 0.0) {
        return Err(Error::Schedule(format!("excision radii must lie in [0, {radius})")));
    }
    Ok(())
}

#[inline]
fn pow_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

fn node_values(u: &impl Field, mesh: &BallMesh, first: &[Option<usize>]) -> Result<Vec<f64>> {
    if u.dim() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            found: u.dim(),
        });
    }
    let vals = exec::map_range(mesh.len(), |i| if first[i].is_some() { u.value(mesh.point(i)) } else { 0.0 });
    if let Some(i) = (0..vals.len()).find(|&i| !vals[i].is_finite()) {
        return Err(Error::NonFinite(format!("field is not finite at {:?}", mesh.point(i))));
    }
    Ok(vals)
}

/// Per-level sums from per-node bin vectors: `out[k] = sum_{b <= k} bins[b]`.
fn cumulate(per_node: &[Vec<f64>], levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels);
    let mut running = 0.0;
    for k in 0..levels {
        let column: Vec<f64> = per_node.iter().map(|b| b[k]).collect();
        running += exec::pairwise_sum(&column);
        out.push(running);
    }
    out
}

/// `int_{B \ B_eps} |u|^r` for each excision radius in the decreasing list.
pub fn lebesgue_power_by_level(u: &impl Field, r: f64, mesh: &BallMesh, levels: &[f64]) -> Result<Vec<f64>> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::Exponent(format!("Lebesgue exponent {r} must be at least 1")));
    }
    check_levels(levels, mesh.ball.radius())?;
    let first = mesh.first_levels(levels);
    let vals = node_values(u, mesh, &first)?;
    let per_node: Vec<Vec<f64>> = (0..mesh.len())
        .map(|i| {
            let mut bins = vec![0.0; levels.len()];
            if let Some(k) = first[i] {
                bins[k] = pow_p(vals[i].abs(), r) * mesh.weights[i];
            }
            bins
        })
        .collect();
    Ok(cumulate(&per_node, levels.len()))
}

/// `(int_{B \ B_excision} |u|^r)^{1/r}` by midpoint quadrature on `mesh`.
pub fn lebesgue_norm_on(u: &impl Field, r: f64, mesh: &BallMesh, excision: f64) -> Result<f64> {
    let v = lebesgue_power_by_level(u, r, mesh, &[excision])?;
    Ok(v[0].powf(1.0 / r))
}

/// [`lebesgue_norm_on`] with the default Cartesian mesh on `ball`.
pub fn lebesgue_norm(u: &impl Field, r: f64, ball: &Ball, excision: f64) -> Result<f64> {
    lebesgue_norm_on(u, r, &BallMesh::default_for(ball)?, excision)
}

fn check_sobolev(eta: f64, p: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Exponent(format!("smoothness {eta} must lie in (0, 1)")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Exponent(format!("integrability {p} must be at least 1")));
    }
    Ok(())
}

/// `E|omega_1|^p` for `omega` uniform on the unit sphere of `R^N`.
pub fn sphere_moment(dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    gamma(0.5 * n) * gamma(0.5 * (p + 1.0)) / (PI.sqrt() * gamma(0.5 * (n + p)))
}

/// `int int_{[0,1]^N x [0,1]^N} |x - y|^beta dx dy` for `beta > -N`.
pub fn cube_pair_moment(dim: usize, beta: f64) -> f64 {
    assert!(beta > -(dim as f64), "beta must exceed -N");
    let n = dim as f64;
    let m = dim - 1;
    let rule = gauss_legendre(16);
    let q = rule.len();
    let total = q.pow(m as u32);
    let mut acc = 0.0;
    let mut coeffs = vec![0.0; dim + 1];
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        let mut norm2 = 1.0;
        // polynomial (1 - t) prod_i (1 - t v_i), coefficients in t
        coeffs.iter_mut().for_each(|c| *c = 0.0);
        coeffs[0] = 1.0;
        coeffs[1] = -1.0;
        let mut deg = 1;
        for _ in 0..m {
            let i = rem % q;
            rem /= q;
            let v = 0.5 * (1.0 + rule.nodes[i]);
            w *= 0.5 * rule.weights[i];
            norm2 += v * v;
            for d in (1..=deg + 1).rev() {
                coeffs[d] -= v * coeffs[d - 1];
            }
            deg += 1;
        }
        let radial: f64 = coeffs.iter().enumerate().map(|(k, c)| c / (n + beta + k as f64)).sum();
        acc += w * norm2.powf(0.5 * beta) * radial;
    }
    2f64.powi(dim as i32) * n * acc
}

/// Central-difference gradient of a field.
fn fd_gradient(u: &impl Field, x: &[f64], step: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + step;
            let a = u.value(&y);
            y[k] = x[k] - step;
            let b = u.value(&y);
            y[k] = x[k];
            (a - b) / (2.0 * step)
        })
        .collect()
}

/// Estimate of the same-cell part of the double integral from the gradient.
fn same_cell_terms(
    u: &impl Field,
    mesh: &BallMesh,
    first: &[Option<usize>],
    eta: f64,
    p: f64,
) -> Result<Vec<f64>> {
    let dim = mesh.dim();
    let beta = p - dim as f64 - eta * p;
    let g = cube_pair_moment(dim, beta);
    let a = sphere_moment(dim, p);
    let terms = exec::map_range(mesh.len(), |i| {
        if first[i].is_none() {
            return 0.0;
        }
        let hs = mesh.sizes[i];
        let grad = fd_gradient(u, mesh.point(i), 0.25 * hs);
        let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        a * pow_p(gn, p) * hs.powf(2.0 * dim as f64 + beta) * g
    });
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("gradient estimate".into()));
    }
    Ok(terms)
}

/// `int int_{(B \ B_eps)^2} |u(x)-u(y)|^p / |x-y|^{N+eta p}` for each
/// excision radius in the decreasing list.
pub fn gagliardo_power_by_level(
    u: &impl Field,
    eta: f64,
    p: f64,
    mesh: &BallMesh,
    levels: &[f64],
) -> Result<Vec<f64>> {
    check_sobolev(eta, p)?;
    check_levels(levels, mesh.ball.radius())?;
    let dim = mesh.dim();
    let first = mesh.first_levels(levels);
    let vals = node_values(u, mesh, &first)?;
    let diag = same_cell_terms(u, mesh, &first, eta, p)?;
    let expo = -0.5 * (dim as f64 + eta * p);
    let nl = levels.len();
    let active: Vec<usize> = (0..mesh.len()).filter(|&i| first[i].is_some()).collect();

    let kernel: Option<Vec<f64>> = mesh.lattice.as_ref().map(|l| {
        exec::map_range(l.n.pow(dim as u32), |flat| {
            let mut rem = flat;
            let mut r2 = 0.0;
            for _ in 0..dim {
                r2 += ((rem % l.n) as f64 * l.h).powi(2);
                rem /= l.n;
            }
            if r2 == 0.0 {
                0.0
            } else {
                r2.powf(expo)
            }
        })
    });

    let per_node = exec::map_range(active.len(), |a| {
        let i = active[a];
        let fi = first[i].expect("active");
        let mut bins = vec![0.0; nl];
        let mut idx_i = vec![0usize; dim];
        let mut idx_j = vec![0usize; dim];
        if let (Some(l), Some(_)) = (&mesh.lattice, &kernel) {
            split_index(l.index[i], l.n, &mut idx_i);
        }
        for &j in &active {
            if j == i {
                continue;
            }
            let k = match (&mesh.lattice, &kernel) {
                (Some(l), Some(table)) => {
                    split_index(l.index[j], l.n, &mut idx_j);
                    let off = idx_i.iter().zip(&idx_j).fold(0, |o, (x, y)| o * l.n + x.abs_diff(*y));
                    table[off]
                }
                _ => {
                    let (xi, xj) = (mesh.point(i), mesh.point(j));
                    let r2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                    r2.powf(expo)
                }
            };
            let b = fi.max(first[j].expect("active"));
            bins[b] += pow_p((vals[i] - vals[j]).abs(), p) * k * mesh.weights[j];
        }
        for v in bins.iter_mut() {
            *v *= mesh.weights[i];
        }
        bins[fi] += diag[i];
        bins
    });
    Ok(cumulate(&per_node, nl))
}

fn split_index(mut flat: usize, n: usize, out: &mut [usize]) {
    for k in (0..out.len()).rev() {
        out[k] = flat % n;
        flat /= n;
    }
}

/// Plain double loop over node pairs, in node order, for cross-checking
/// [`gagliardo_power_by_level`].
pub fn gagliardo_power_brute_force(u: &impl Field, eta: f64, p: f64, mesh: &BallMesh, excision: f64) -> Result<f64> {
    check_sobolev(eta, p)?;
    let first = mesh.first_levels(&[excision]);
    let vals = node_values(u, mesh, &first)?;
    let diag = same_cell_terms(u, mesh, &first, eta, p)?;
    let dim = mesh.dim() as f64;
    let mut acc = 0.0;
    for i in 0..mesh.len() {
        if first[i].is_none() {
            continue;
        }
        acc += diag[i];
        for j in 0..mesh.len() {
            if j == i || first[j].is_none() {
                continue;
            }
            let r = distance(mesh.point(i), mesh.point(j));
            acc += (vals[i] - vals[j]).abs().powf(p) / r.powf(dim + eta * p) * mesh.weights[i] * mesh.weights[j];
        }
    }
    Ok(acc)
}

/// Gagliardo seminorm `[u]_{W^{eta,p}(B \ B_excision)}` on `mesh`.
pub fn gagliardo_seminorm_on(u: &impl Field, eta: f64, p: f64, mesh: &BallMesh, excision: f64) -> Result<f64> {
    let v = gagliardo_power_by_level(u, eta, p, mesh, &[excision])?;
    Ok(v[0].powf(1.0 / p))
}

/// [`gagliardo_seminorm_on`] with the default Cartesian mesh on `ball`.
pub fn gagliardo_seminorm(u: &impl Field, eta: f64, p: f64, ball: &Ball, excision: f64) -> Result<f64> {
    gagliardo_seminorm_on(u, eta, p, &BallMesh::default_for(ball)?, excision)
}

/// `||u||_{L^p(B)} + [u]_{W^{eta,p}(B)}` on `mesh`.
pub fn full_sobolev_norm_on(u: &impl Field, eta: f64, p: f64, mesh: &BallMesh) -> Result<f64> {
    check_sobolev(eta, p)?;
    Ok(lebesgue_norm_on(u, p, mesh, 0.0)? + gagliardo_seminorm_on(u, eta, p, mesh, 0.0)?)
}

pub fn full_sobolev_norm(u: &impl Field, eta: f64, p: f64, ball: &Ball) -> Result<f64> {
    full_sobolev_norm_on(u, eta, p, &BallMesh::default_for(ball)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    /// `N p / (N - eta p)`.
    pub gamma_bar: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, zero when both vanish.
    pub ratio: f64,
}

/// `N p / (N - eta p)`.
pub fn embedding_exponent(dim: usize, eta: f64, p: f64) -> Result<f64> {
    check_sobolev(eta, p)?;
    let n = dim as f64;
    if eta * p >= n {
        return Err(Error::Exponent(format!("eta p = {} must be below N = {dim}", eta * p)));
    }
    Ok(n * p / (n - eta * p))
}

/// `||v||_{L^gamma_bar(B)}` against `||v||_{W^{eta,p}(B)}` on `mesh`.
pub fn embedding_check_on(v: &impl Field, eta: f64, p: f64, mesh: &BallMesh) -> Result<EmbeddingCheck> {
    let gamma_bar = embedding_exponent(mesh.dim(), eta, p)?;
    let lhs = lebesgue_norm_on(v, gamma_bar, mesh, 0.0)?;
    let rhs = full_sobolev_norm_on(v, eta, p, mesh)?;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(EmbeddingCheck {
        gamma_bar,
        lhs,
        rhs,
        ratio,
    })
}

pub fn embedding_check(v: &impl Field, eta: f64, p: f64, ball: &Ball) -> Result<EmbeddingCheck> {
    embedding_check_on(v, eta, p, &BallMesh::default_for(ball)?)
}

/// Result of an excision sweep for one norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub spec: ExponentSpec,
    pub ball: Ball,
    pub excision_radii: Vec<f64>,
    /// Norm on `B \ B_eps`, one per excision radius.
    pub values: Vec<f64>,
    pub divergence_flag: bool,
    /// Exponent `kappa` in `V^p(eps/2) - V^p(eps) ~ eps^kappa`; infinite when
    /// the increments vanish.
    pub fitted_rate: f64,
    /// Log-log slope of value against excision radius.
    pub value_slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `(fitted_rate, value_slope, divergent)` from powers `V^p` per level.
pub fn classify(radii: &[f64], powers: &[f64], p: f64) -> (f64, f64, bool) {
    let values: Vec<f64> = powers.iter().map(|v| v.powf(1.0 / p)).collect();
    let value_slope = if radii.len() >= 2 && values.iter().all(|v| *v > 0.0) {
        let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        ls_slope(&lx, &ly)
    } else {
        0.0
    };
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for j in 0..powers.len().saturating_sub(1) {
        let d = powers[j + 1] - powers[j];
        if d > 0.0 {
            lx.push(radii[j].ln());
            ly.push(d.ln());
        }
    }
    if lx.len() < 2 {
        return (f64::INFINITY, value_slope, false);
    }
    let rate = ls_slope(&lx, &ly);
    (rate, value_slope, rate < DIVERGENCE_RATE)
}

/// `R 2^{-(4 + j)}`, `j = 0..levels`.
pub fn default_schedule(radius: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|j| radius * 0.5f64.powi(4 + j as i32)).collect()
}

/// Excision sweeps of several norms on a shared mesh.
pub fn regularity_sweep_on(
    u: &impl Field,
    specs: &[ExponentSpec],
    mesh: &BallMesh,
    schedule: &[f64],
) -> Result<Vec<NormReport>> {
    check_levels(schedule, mesh.ball.radius())?;
    let last = schedule[schedule.len() - 1];
    if last < mesh.min_excision() * (1.0 - 1e-12) {
        return Err(Error::Schedule(format!(
            "smallest excision radius {last} is below the resolved radius {}",
            mesh.min_excision()
        )));
    }
    specs
        .iter()
        .map(|spec| {
            spec.validate()?;
            let powers = match *spec {
                ExponentSpec::Lebesgue { r } => lebesgue_power_by_level(u, r, mesh, schedule)?,
                ExponentSpec::Sobolev { eta, p } => gagliardo_power_by_level(u, eta, p, mesh, schedule)?,
            };
            let p = spec.power();
            let (fitted_rate, value_slope, divergence_flag) = classify(schedule, &powers, p);
            Ok(NormReport {
                spec: *spec,
                ball: mesh.ball.clone(),
                excision_radii: schedule.to_vec(),
                values: powers.iter().map(|v| v.powf(1.0 / p)).collect(),
                divergence_flag,
                fitted_rate,
                value_slope,
            })
        })
        .collect()
}

/// [`regularity_sweep_on`] with a log-polar mesh about the ball center
/// reaching down to the last excision radius (`N = 2, 3`), or the default
/// Cartesian mesh otherwise.
pub fn regularity_sweep(
    u: &impl Field,
    specs: &[ExponentSpec],
    ball: &Ball,
    schedule: &[f64],
) -> Result<Vec<NormReport>> {
    check_levels(schedule, ball.radius())?;
    let last = schedule[schedule.len() - 1];
    let mesh = if (2..=3).contains(&ball.dim()) && last > 0.0 {
        let per_octave = if ball.dim() == 2 { DEFAULT_PER_OCTAVE } else { 3 };
        BallMesh::log_polar(ball, per_octave, last)?
    } else {
        BallMesh::default_for(ball)?
    };
    regularity_sweep_on(u, specs, &mesh, schedule)
}
