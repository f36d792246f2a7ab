use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation point coincides with a singularity at distance {distance:e}")]
    SingularPoint { distance: f64 },

    #[error("box too small: {0}")]
    BoxTooSmall(String),

    #[error("mollifier bandwidth {bandwidth} is below two grid cells (spacing {spacing})")]
    UnresolvedBandwidth { bandwidth: f64, spacing: f64 },

    #[error("evaluation point lies within {distance} of the box boundary (need {required})")]
    BoundaryProximity { distance: f64, required: f64 },

    #[error("field does not decay at the box boundary: max boundary value {boundary_max:e} exceeds {tolerance:e}")]
    InsufficientDecay { boundary_max: f64, tolerance: f64 },

    #[error("exponent condition violated: {0}")]
    Exponent(String),

    #[error("support error: {0}")]
    Support(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
