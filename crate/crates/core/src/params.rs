//! Problem parameters: dimension, fractional order and the normalization
//! constants of the Riesz kernel / fractional Laplacian pair.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Dimension `N`, order `s` and the kernel constants.
///
/// `potential_constant` is `C_{N,s}` in `w = C_{N,s} |x|^{-(N-2s)} * f`, and
/// `operator_constant` is `c_{N,s}` in front of the principal-value integral.
/// With the default constants both sides correspond to the Fourier symbol
/// `|xi|^{2s}`, so the Riesz potential inverts the operator exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    dim: usize,
    order: f64,
    potential_constant: f64,
    operator_constant: f64,
}

impl FracParams {
    /// Builds parameters with the standard constant pair.
    pub fn new(dim: usize, order: f64) -> Result<Self> {
        Self::validate(dim, order)?;
        let n = dim as f64;
        let s = order;
        let potential_constant =
            gamma((n - 2.0 * s) / 2.0) / (4f64.powf(s) * PI.powf(n / 2.0) * gamma(s));
        let operator_constant =
            4f64.powf(s) * gamma(n / 2.0 + s) / (PI.powf(n / 2.0) * gamma(-s).abs());
        Self::with_constants(dim, order, potential_constant, operator_constant)
    }

    /// Builds parameters with caller-chosen constants.
    pub fn with_constants(
        dim: usize,
        order: f64,
        potential_constant: f64,
        operator_constant: f64,
    ) -> Result<Self> {
        Self::validate(dim, order)?;
        for (name, v) in [
            ("potential_constant", potential_constant),
            ("operator_constant", operator_constant),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        Ok(Self {
            dim,
            order,
            potential_constant,
            operator_constant,
        })
    }

    fn validate(dim: usize, order: f64) -> Result<()> {
        if dim < 2 {
            return Err(invalid("dim", format!("need N >= 2, got {dim}")));
        }
        if !(order > 0.5 && order < 1.0) {
            return Err(invalid(
                "order",
                format!("s must lie in (1/2, 1), got {order}"),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn potential_constant(&self) -> f64 {
        self.potential_constant
    }

    pub fn operator_constant(&self) -> f64 {
        self.operator_constant
    }

    /// Decay exponent `N - 2s` of the Riesz kernel.
    pub fn riesz_exponent(&self) -> f64 {
        self.dim as f64 - 2.0 * self.order
    }

    pub fn critical_exponents(&self) -> CriticalExponents {
        critical_exponents(self)
    }
}

/// Sharp integrability thresholds for the fundamental solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    /// `N / (N - 2s)`: Lebesgue threshold.
    pub r_star: f64,
    /// `(N + 2 - 2s) / (N + 1 - 2s)`: fractional Sobolev threshold.
    pub q_star: f64,
    order: f64,
}

impl CriticalExponents {
    /// Differentiability index `1 - (2 - 2s)/q` paired with integrability `q`.
    pub fn eta_of(&self, q: f64) -> f64 {
        1.0 - (2.0 - 2.0 * self.order) / q
    }
}

pub fn critical_exponents(params: &FracParams) -> CriticalExponents {
    let n = params.dim as f64;
    let s = params.order;
    CriticalExponents {
        r_star: n / (n - 2.0 * s),
        q_star: (n + 2.0 - 2.0 * s) / (n + 1.0 - 2.0 * s),
        order: s,
    }
}

/// Volume of the unit ball in `R^N`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let n = dim as f64;
    PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0)
}

/// Surface area of the unit sphere `S^{N-1}`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}
