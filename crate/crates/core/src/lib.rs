//! Duality solutions of `(-Delta)^s u = mu` on `R^N` for compactly supported
//! measure data.
//!
//! The crate evaluates Riesz potentials of atomic measures and grid
//! densities, applies the fractional Laplacian by principal-value quadrature
//! (with an independent spectral evaluator as a cross-check), computes local
//! Lebesgue and Gagliardo norms, and assembles the duality-solution pipeline:
//! mollify the measure, take the Riesz potential, and verify the pairing
//! `int u g = int w dmu` against a battery of test functions.
//!
//! Bulk loops run on rayon when the `parallel` feature is enabled (default)
//! and sequentially otherwise; both paths are bit-identical, see [`exec`].

pub mod duality;
pub mod error;
pub mod exec;
pub mod fft;
pub mod fraclap;
pub mod grid;
pub mod kernel;
pub mod measure;
pub mod norms;
pub mod params;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
pub use grid::{Ball, ConstantField, ExponentSpec, Field, FnField, GridFunction};
pub use measure::{Atom, AtomicMeasure};
pub use params::{critical_exponents, CriticalExponents, FracParams};
