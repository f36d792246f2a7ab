//! Uniform tensor grids, balls and the [`Field`] abstraction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;

/// A scalar field that can be evaluated at arbitrary points.
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

impl<T: Field + ?Sized> Field for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

/// Adapter turning a closure into a [`Field`].
#[derive(Clone)]
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Field for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Constant field.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField {
    pub dim: usize,
    pub value: f64,
}

impl Field for ConstantField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        if center.is_empty() {
            return Err(invalid("center", "empty center vector"));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], radius)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        distance(x, &self.center) <= self.radius
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Values of a scalar field at the cell centers of a uniform tensor grid
/// over the cube `center + [-half_width, half_width]^N`.
///
/// Storage is row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    center: Vec<f64>,
    half_width: f64,
    resolution: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(center: Vec<f64>, half_width: f64, resolution: usize, values: Vec<f64>) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("center", "empty center vector"));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("half_width", format!("must be positive, got {half_width}")));
        }
        if resolution == 0 {
            return Err(invalid("resolution", "must be at least 1"));
        }
        let expected = resolution
            .checked_pow(center.len() as u32)
            .ok_or_else(|| invalid("resolution", "grid size overflows"))?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            center,
            half_width,
            resolution,
            values,
        })
    }

    pub fn zeros(center: Vec<f64>, half_width: f64, resolution: usize) -> Result<Self> {
        let len = resolution.pow(center.len() as u32);
        Self::new(center, half_width, resolution, vec![0.0; len])
    }

    /// Samples `f` at every cell center.
    pub fn from_fn<F>(center: Vec<f64>, half_width: f64, resolution: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let mut g = Self::zeros(center, half_width, resolution)?;
        let values = {
            let g_ref = &g;
            exec::map_range(g.len(), |i| {
                let mut x = vec![0.0; g_ref.dim()];
                g_ref.point_into(i, &mut x);
                f(&x)
            })
        };
        g.values = values;
        Ok(g)
    }

    pub fn sample(field: &impl Field, center: Vec<f64>, half_width: f64, resolution: usize) -> Result<Self> {
        if field.dim() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: field.dim(),
            });
        }
        Self::from_fn(center, half_width, resolution, |x| field.value(x))
    }

    /// Same geometry, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.center.clone(), self.half_width, self.resolution, values)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Lower corner of the box along `axis`.
    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.half_width
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.resolution;
        for k in (0..self.dim()).rev() {
            out[k] = flat % n;
            flat /= n;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.lower(axis) + (i as f64 + 0.5) * self.spacing()
    }

    /// Cell center of the flat index `flat`.
    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let n = self.resolution;
        let h = self.spacing();
        let mut rem = flat;
        for k in (0..self.dim()).rev() {
            let i = rem % n;
            rem /= n;
            out[k] = self.center[k] - self.half_width + (i as f64 + 0.5) * h;
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point_into(flat, &mut x);
        x
    }

    /// Index of the cell containing `x`, if inside the box.
    pub fn cell_of(&self, x: &[f64]) -> Option<Vec<usize>> {
        let h = self.spacing();
        let mut idx = Vec::with_capacity(self.dim());
        for (k, &xk) in x.iter().enumerate() {
            let t = (xk - self.lower(k)) / h;
            if !(0.0..=self.resolution as f64).contains(&t) {
                return None;
            }
            idx.push((t.floor() as usize).min(self.resolution - 1));
        }
        Some(idx)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() <= self.half_width)
    }

    /// Distance from `x` to the nearest box face (negative outside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, c)| self.half_width - (a - c).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `sum v_i * cell_volume`.
    pub fn integral(&self) -> f64 {
        exec::pairwise_sum(&self.values) * self.cell_volume()
    }

    /// `sum |v_i| * cell_volume`.
    pub fn l1_mass(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        exec::pairwise_sum(&abs) * self.cell_volume()
    }

    /// Discrete `L^p` norm over the whole box; `p = inf` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let pw: Vec<f64> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        (exec::pairwise_sum(&pw) * self.cell_volume()).powf(1.0 / p)
    }

    /// `sum a_i b_i * cell_volume` over two grids with identical geometry.
    pub fn dot(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_geometry(other)?;
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(exec::pairwise_sum(&prod) * self.cell_volume())
    }

    pub fn check_same_geometry(&self, other: &GridFunction) -> Result<()> {
        if self.center != other.center
            || self.half_width != other.half_width
            || self.resolution != other.resolution
        {
            return Err(invalid("grid", "grids have different geometry"));
        }
        Ok(())
    }

    /// `a * self + b * other` on identical geometry.
    pub fn lin_comb(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.check_same_geometry(other)?;
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        self.with_values(v)
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| a * v).collect(),
            ..self.clone()
        }
    }

    /// Multilinear interpolation between cell centers, constant within the
    /// outer half cell, zero outside the box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        let dim = self.dim();
        let n = self.resolution;
        let h = self.spacing();
        let mut base = [0usize; 8];
        let mut frac = [0f64; 8];
        let mut base_v = vec![0usize; dim];
        let mut frac_v = vec![0f64; dim];
        let (base, frac): (&mut [usize], &mut [f64]) = if dim <= 8 {
            (&mut base[..dim], &mut frac[..dim])
        } else {
            (&mut base_v[..], &mut frac_v[..])
        };
        for k in 0..dim {
            let t = ((x[k] - self.lower(k)) / h - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = (t.floor() as usize).min(n.saturating_sub(2));
            base[k] = i0;
            frac[k] = if n == 1 { 0.0 } else { t - i0 as f64 };
        }
        let mut acc = 0.0;
        let corners = 1usize << dim;
        for c in 0..corners {
            let mut w = 1.0;
            let mut flat = 0usize;
            for k in 0..dim {
                let bit = (c >> (dim - 1 - k)) & 1;
                let i = (base[k] + bit).min(n - 1);
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                flat = flat * n + i;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Largest absolute value over the cells touching the box boundary.
    pub fn boundary_max(&self) -> f64 {
        let n = self.resolution;
        let mut idx = vec![0usize; self.dim()];
        let mut m: f64 = 0.0;
        for flat in 0..self.len() {
            self.multi_index(flat, &mut idx);
            if idx.iter().any(|&i| i == 0 || i + 1 == n) {
                m = m.max(self.values[flat].abs());
            }
        }
        m
    }
}

impl Field for GridFunction {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.interpolate(x)
    }
}

/// Integrability exponent for a norm sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentSpec {
    Lebesgue { r: f64 },
    Sobolev { eta: f64, p: f64 },
}

impl ExponentSpec {
    pub fn lebesgue(r: f64) -> Result<Self> {
        let spec = ExponentSpec::Lebesgue { r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sobolev(eta: f64, p: f64) -> Result<Self> {
        let spec = ExponentSpec::Sobolev { eta, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ExponentSpec::Lebesgue { r } if !(r >= 1.0 && r.is_finite()) => {
                Err(Error::Exponent(format!("Lebesgue exponent r = {r} must be >= 1")))
            }
            ExponentSpec::Sobolev { eta, p } if !(eta > 0.0 && eta < 1.0) => Err(Error::Exponent(
                format!("Sobolev smoothness eta = {eta} must lie in (0, 1) (p = {p})"),
            )),
            ExponentSpec::Sobolev { p, .. } if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::Exponent(format!("Sobolev exponent p = {p} must be >= 1")))
            }
            _ => Ok(()),
        }
    }

    /// The integrability exponent (`r` or `p`).
    pub fn power(&self) -> f64 {
        match *self {
            ExponentSpec::Lebesgue { r } => r,
            ExponentSpec::Sobolev { p, .. } => p,
        }
    }

    /// Short label used in reports, e.g. `L^3` or `W^{0.667,1.5}`.
    pub fn label(&self) -> String {
        match *self {
            ExponentSpec::Lebesgue { r } => format!("L^{r}"),
            ExponentSpec::Sobolev { eta, p } => format!("W^{{{eta:.6},{p}}}"),
        }
    }
}
