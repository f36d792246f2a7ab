use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::norm;

/// A point mass `weight * delta_point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Finite signed combination of Dirac masses supported in the closed ball
/// of radius `support_radius` about the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    support_radius: f64,
}

impl AtomicMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>, support_radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if !(support_radius.is_finite() && support_radius > 0.0) {
            return Err(invalid(
                "support_radius",
                format!("must be positive, got {support_radius}"),
            ));
        }
        for a in &atoms {
            if a.point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.point.len(),
                });
            }
            if !a.weight.is_finite() || a.point.iter().any(|v| !v.is_finite()) {
                return Err(invalid("atoms", "non-finite atom"));
            }
            let r = norm(&a.point);
            if r > support_radius * (1.0 + 1e-12) {
                return Err(Error::Support(format!(
                    "atom at distance {r} outside support radius {support_radius}"
                )));
            }
        }
        Ok(Self {
            dim,
            atoms,
            support_radius,
        })
    }

    pub fn zero(dim: usize, support_radius: f64) -> Result<Self> {
        Self::new(dim, Vec::new(), support_radius)
    }

    /// `weight * delta_point`, with support radius `max(|point|, min_radius)`.
    pub fn dirac(point: Vec<f64>, weight: f64, min_radius: f64) -> Result<Self> {
        let r = norm(&point).max(min_radius);
        Self::new(point.len(), vec![Atom { point, weight }], r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `|mu|(R^N) = sum |w_i|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    /// `mu(R^N) = sum w_i`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point.clone(),
                    weight: factor * a.weight,
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Concatenation of the atoms of `self` and `other`.
    pub fn sum(&self, other: &AtomicMeasure) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self::new(
            self.dim,
            atoms,
            self.support_radius.max(other.support_radius),
        )
    }

    /// Shifts every atom by `offset`; the support radius grows accordingly.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                point: a.point.iter().zip(offset).map(|(p, o)| p + o).collect(),
                weight: a.weight,
            })
            .collect();
        let r = self.support_radius + norm(offset);
        Self::new(self.dim, atoms, r)
    }

    /// `sum w_i phi(y_i)`.
    pub fn pair(&self, phi: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * phi(&a.point)).sum()
    }
}
