//! Riesz kernel, mollifiers and radial cutoff functions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::grid::{norm, Ball, Field, GridFunction};
use crate::measure::AtomicMeasure;
use crate::params::FracParams;

/// `C_{N,s} |x|^{-(N-2s)}`.
pub fn riesz_kernel(x: &[f64], params: &FracParams) -> Result<f64> {
    if x.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: x.len(),
        });
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::SingularPoint { distance: 0.0 });
    }
    Ok(riesz_kernel_radial(r, params))
}

#[inline]
pub fn riesz_kernel_radial(r: f64, params: &FracParams) -> f64 {
    params.potential_constant() * r.powf(-params.riesz_exponent())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierProfile {
    /// `exp(-|x|^2 / eps^2)`, cut at `6 eps` and renormalized.
    GaussianTruncated,
    /// `(1 - |x|^2/eps^2)^4` on the ball of radius `eps`.
    PolynomialBump,
}

const BUMP_POWER: i32 = 4;
const GAUSSIAN_CUT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub bandwidth: f64,
    pub profile: MollifierProfile,
}

impl MollifierSpec {
    pub fn new(bandwidth: f64, profile: MollifierProfile) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(invalid("bandwidth", format!("must be positive, got {bandwidth}")));
        }
        Ok(Self { bandwidth, profile })
    }

    pub fn support_radius(&self) -> f64 {
        match self.profile {
            MollifierProfile::GaussianTruncated => GAUSSIAN_CUT * self.bandwidth,
            MollifierProfile::PolynomialBump => self.bandwidth,
        }
    }

    /// Normalized radial profile in dimension `dim`.
    pub fn density(&self, dim: usize, r: f64) -> f64 {
        let eps = self.bandwidth;
        let n = dim as f64;
        match self.profile {
            MollifierProfile::GaussianTruncated => {
                if r > GAUSSIAN_CUT * eps {
                    return 0.0;
                }
                let mass = (PI * eps * eps).powf(n / 2.0)
                    * gamma_lr(n / 2.0, GAUSSIAN_CUT * GAUSSIAN_CUT);
                (-r * r / (eps * eps)).exp() / mass
            }
            MollifierProfile::PolynomialBump => {
                if r >= eps {
                    return 0.0;
                }
                let k = BUMP_POWER as f64;
                let mass =
                    eps.powf(n) * PI.powf(n / 2.0) * gamma(k + 1.0) / gamma(k + 1.0 + n / 2.0);
                (1.0 - r * r / (eps * eps)).powi(BUMP_POWER) / mass
            }
        }
    }
}

/// Target grid for [`mollify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Vec<f64>,
    pub half_width: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(center: Vec<f64>, half_width: f64, resolution: usize) -> Self {
        Self {
            center,
            half_width,
            resolution,
        }
    }

    pub fn centered(dim: usize, half_width: f64, resolution: usize) -> Self {
        Self::new(vec![0.0; dim], half_width, resolution)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn zeros(&self) -> Result<GridFunction> {
        GridFunction::zeros(self.center.clone(), self.half_width, self.resolution)
    }

    /// Whether the box contains the closed ball `B(0, radius)`.
    pub fn contains_origin_ball(&self, radius: f64) -> bool {
        self.center
            .iter()
            .all(|c| c - self.half_width <= -radius && c + self.half_width >= radius)
    }
}

/// Smooths `mu` into a grid density.
///
/// Each atom's footprint is renormalized on the grid so that its discrete
/// mass equals the atom weight exactly; the result is therefore linear in
/// `mu` and `sum |f| dx <= |mu|(R^N)`.
pub fn mollify(mu: &AtomicMeasure, spec: &MollifierSpec, target: &GridSpec) -> Result<GridFunction> {
    let dim = mu.dim();
    if target.center.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: target.center.len(),
        });
    }
    let h = target.spacing();
    if spec.bandwidth < 2.0 * h {
        return Err(Error::UnresolvedBandwidth {
            bandwidth: spec.bandwidth,
            spacing: h,
        });
    }
    let reach = mu.support_radius() + spec.support_radius();
    if !target.contains_origin_ball(reach) {
        return Err(Error::BoxTooSmall(format!(
            "box must contain the ball of radius {reach} about the origin"
        )));
    }
    let mut grid = target.zeros()?;
    if mu.is_empty() {
        return Ok(grid);
    }
    let support = spec.support_radius();
    let cell_volume = grid.cell_volume();
    // discrete mass of each atom's footprint
    let scales: Vec<f64> = mu
        .atoms()
        .iter()
        .map(|a| {
            let s = footprint_sum(&grid, &a.point, support, |r| spec.density(dim, r)) * cell_volume;
            if s > 0.0 {
                a.weight / s
            } else {
                0.0
            }
        })
        .collect();
    let values = {
        let g = &grid;
        exec::map_range(g.len(), |i| {
            let mut x = vec![0.0; dim];
            g.point_into(i, &mut x);
            let mut acc = 0.0;
            for (a, scale) in mu.atoms().iter().zip(&scales) {
                let r = crate::grid::distance(&x, &a.point);
                if r <= support {
                    acc += scale * spec.density(dim, r);
                }
            }
            acc
        })
    };
    grid.values_mut().copy_from_slice(&values);
    Ok(grid)
}

// sum of profile(|x - center|) over the grid cells within `support` of center
fn footprint_sum(grid: &GridFunction, center: &[f64], support: f64, profile: impl Fn(f64) -> f64) -> f64 {
    let dim = grid.dim();
    let h = grid.spacing();
    let n = grid.resolution() as i64;
    let mut lo = vec![0i64; dim];
    let mut hi = vec![0i64; dim];
    for k in 0..dim {
        let t0 = ((center[k] - support - grid.lower(k)) / h - 0.5).floor() as i64;
        let t1 = ((center[k] + support - grid.lower(k)) / h - 0.5).ceil() as i64;
        lo[k] = t0.max(0);
        hi[k] = t1.min(n - 1);
        if lo[k] > hi[k] {
            return 0.0;
        }
    }
    let mut idx = lo.clone();
    let mut terms = Vec::new();
    let mut x = vec![0.0; dim];
    loop {
        for k in 0..dim {
            x[k] = grid.coordinate(k, idx[k] as usize);
        }
        let r = crate::grid::distance(&x, center);
        if r <= support {
            terms.push(profile(r));
        }
        // odometer increment
        let mut k = dim;
        loop {
            if k == 0 {
                return exec::pairwise_sum(&terms);
            }
            k -= 1;
            if idx[k] < hi[k] {
                idx[k] += 1;
                break;
            }
            idx[k] = lo[k];
        }
    }
}

/// Radial cutoff: `1` on the ball, `0` beyond `radius + margin`, with a
/// quintic `C^2` ramp in between.
#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff {
    ball: Ball,
    margin: f64,
}

pub fn cutoff(ball: Ball, margin: f64) -> Result<Cutoff> {
    if !(margin.is_finite() && margin > 0.0) {
        return Err(invalid("margin", format!("must be positive, got {margin}")));
    }
    Ok(Cutoff { ball, margin })
}

/// `1 - (10 t^3 - 15 t^4 + 6 t^5)` clamped to `t` in `[0, 1]`.
#[inline]
pub fn smooth_ramp(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

impl Cutoff {
    pub fn radial(&self, r: f64) -> f64 {
        smooth_ramp((r - self.ball.radius()) / self.margin)
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }
}

impl Field for Cutoff {
    fn dim(&self) -> usize {
        self.ball.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.radial(crate::grid::distance(x, self.ball.center()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use crate::params::unit_sphere_area;
    use crate::quadrature::GaussLegendre;

    fn p(n: usize, s: f64) -> FracParams {
        FracParams::new(n, s).unwrap()
    }

    #[test]
    fn kernel_unit_radius_and_symmetry() {
        for (n, s) in [(2, 0.6), (3, 0.75), (4, 0.9)] {
            let par = p(n, s);
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            assert_eq!(riesz_kernel(&x, &par).unwrap(), par.potential_constant());
            let y = vec![0.3; n];
            let ny: Vec<f64> = y.iter().map(|v| -v).collect();
            assert_eq!(riesz_kernel(&y, &par).unwrap(), riesz_kernel(&ny, &par).unwrap());
        }
        assert!(riesz_kernel(&[0.0, 0.0], &p(2, 0.75)).is_err());
    }

    #[test]
    fn kernel_value_n3() {
        // C_{3,0.75} 2^{-1.5}, gamma-function oracle (mpmath)
        let v = riesz_kernel(&[2.0, 0.0, 0.0], &p(3, 0.75)).unwrap();
        assert!((v - 0.022_448_390_265_645_82).abs() < 1e-15);
    }

    #[test]
    fn profiles_have_unit_mass() {
        // radial Gauss-Legendre on the support, independent of the closed forms
        let rule = GaussLegendre::new(60);
        for dim in [2, 3, 5] {
            for profile in [MollifierProfile::GaussianTruncated, MollifierProfile::PolynomialBump] {
                let spec = MollifierSpec::new(0.37, profile).unwrap();
                let rs = spec.support_radius();
                let panels = 8;
                let mut mass = 0.0;
                for k in 0..panels {
                    let a = rs * k as f64 / panels as f64;
                    let b = rs * (k + 1) as f64 / panels as f64;
                    mass += rule.integrate(a, b, |r| {
                        spec.density(dim, r) * unit_sphere_area(dim) * r.powi(dim as i32 - 1)
                    });
                }
                assert!((mass - 1.0).abs() < 1e-10, "{dim} {profile:?} {mass}");
            }
        }
    }

    #[test]
    fn mollified_unit_atom_has_unit_mass() {
        let mu = AtomicMeasure::dirac(vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let spec = MollifierSpec::new(0.1, MollifierProfile::GaussianTruncated).unwrap();
        let f = mollify(&mu, &spec, &GridSpec::centered(2, 1.0, 128)).unwrap();
        assert!((f.l1_mass() - 1.0).abs() < 1e-6);
        assert!(f.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn dipole_cancels_but_keeps_total_variation() {
        let mu = AtomicMeasure::new(
            2,
            vec![
                Atom { point: vec![0.3, 0.0], weight: 1.0 },
                Atom { point: vec![-0.3, 0.0], weight: -1.0 },
            ],
            0.3,
        )
        .unwrap();
        for profile in [MollifierProfile::GaussianTruncated, MollifierProfile::PolynomialBump] {
            let spec = MollifierSpec::new(0.1, profile).unwrap();
            let f = mollify(&mu, &spec, &GridSpec::centered(2, 1.0, 128)).unwrap();
            assert!(f.integral().abs() < 1e-6);
            assert!((f.l1_mass() - 2.0).abs() < 1e-3);
            assert!(f.l1_mass() <= (1.0 + 1e-3) * mu.total_variation());
        }
    }

    #[test]
    fn mollify_errors() {
        let mu = AtomicMeasure::dirac(vec![0.0, 0.0], 1.0, 0.5).unwrap();
        let spec = MollifierSpec::new(0.01, MollifierProfile::PolynomialBump).unwrap();
        assert!(matches!(
            mollify(&mu, &spec, &GridSpec::centered(2, 1.0, 64)),
            Err(Error::UnresolvedBandwidth { .. })
        ));
        let spec = MollifierSpec::new(0.2, MollifierProfile::GaussianTruncated).unwrap();
        assert!(matches!(
            mollify(&mu, &spec, &GridSpec::centered(2, 1.0, 64)),
            Err(Error::BoxTooSmall(_))
        ));
    }

    #[test]
    fn narrow_convergence_is_second_order() {
        // pairing with exp(-|x|^2) at eps = 0.2, 0.1, 0.05 against phi(0) = 1
        let mu = AtomicMeasure::dirac(vec![0.0, 0.0], 1.0, 0.01).unwrap();
        for profile in [MollifierProfile::GaussianTruncated, MollifierProfile::PolynomialBump] {
            let mut errs = Vec::new();
            for eps in [0.2, 0.1, 0.05] {
                let spec = MollifierSpec::new(eps, profile).unwrap();
                let target = GridSpec::centered(2, 1.5, 384);
                let f = mollify(&mu, &spec, &target).unwrap();
                let phi = GridFunction::from_fn(vec![0.0, 0.0], 1.5, 384, |x| {
                    (-(x[0] * x[0] + x[1] * x[1])).exp()
                })
                .unwrap();
                errs.push((f.dot(&phi).unwrap() - 1.0).abs());
            }
            let order = (errs[0] / errs[2]).log2() / 2.0;
            assert!(order >= 1.8, "{profile:?} {errs:?} order {order}");
        }
    }

    #[test]
    fn cutoff_values_and_monotonicity() {
        let c = cutoff(Ball::new(vec![0.5, 0.0], 1.0).unwrap(), 0.5).unwrap();
        assert_eq!(c.value(&[0.5, 0.0]), 1.0);
        assert_eq!(c.value(&[0.5 + 2.0, 0.0]), 0.0);
        assert_eq!(c.radial(0.99), 1.0);
        assert!((c.radial(1.25) - 0.5).abs() < 1e-15);
        assert!(cutoff(Ball::centered(2, 1.0).unwrap(), 0.0).is_err());
    }
}
