use std::fmt;
use std::path::Path;

use fracdual::kernel::{MollifierProfile, MollifierSpec};
use fracdual::{Atom, AtomicMeasure, FracParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Test-function supports lie in `[-0.95, 0.95]^N`.
const BATTERY_REACH: f64 = 0.95;

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    FundamentalSolution,
    DualityConvergence,
    RegularitySweep,
    YoungSuite,
    Lemma24Suite,
    EmbeddingSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::FundamentalSolution,
        Experiment::DualityConvergence,
        Experiment::RegularitySweep,
        Experiment::YoungSuite,
        Experiment::Lemma24Suite,
        Experiment::EmbeddingSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FundamentalSolution => "fundamental_solution",
            Experiment::DualityConvergence => "duality_convergence",
            Experiment::RegularitySweep => "regularity_sweep",
            Experiment::YoungSuite => "young_suite",
            Experiment::Lemma24Suite => "lemma24_suite",
            Experiment::EmbeddingSuite => "embedding_suite",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::FundamentalSolution => "excision sweep of the fundamental solution across the critical exponents",
            Experiment::DualityConvergence => "battery residuals under refinement and the mollified existence pipeline",
            Experiment::RegularitySweep => "excision sweep of a superposition of fundamental solutions",
            Experiment::YoungSuite => "Young's convolution inequality on random pairs",
            Experiment::Lemma24Suite => "sup bound and far-field decay of Riesz potentials of random bumps",
            Experiment::EmbeddingSuite => "fractional Sobolev embedding ratio across bump widths",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub dim: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub resolutions: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierConfig {
    pub profile: MollifierProfile,
    /// Coarsest bandwidth; later levels halve it.
    pub bandwidth: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lebesgue: Option<Vec<f64>>,
    /// Sobolev integrability `q`, paired with `eta = 1 - (2 - 2s)/q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    /// `(p, q)` pairs for Young's inequality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub young: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Grid family for the refinement study of `duality_convergence`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollifier: Option<MollifierConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    /// Number of excision levels in a sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Random draws per item (pairs, bumps, sample points are derived).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// Config with every default filled in and every precondition checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: Experiment,
    pub params: FracParams,
    pub atoms: Vec<Atom>,
    pub grid: GridConfig,
    pub refinement: GridConfig,
    pub mollifier: MollifierConfig,
    pub lebesgue: Vec<f64>,
    pub sobolev_q: Vec<f64>,
    pub sigma: Vec<f64>,
    pub young: Vec<[f64; 2]>,
    pub widths: Vec<f64>,
    pub ball_radius: f64,
    pub levels: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Resolved {
    pub fn measure(&self) -> AtomicMeasure {
        let dim = self.params.dim();
        let radius = self
            .atoms
            .iter()
            .map(|a| fracdual::grid::norm(&a.point))
            .fold(0.1, f64::max);
        AtomicMeasure::new(dim, self.atoms.clone(), radius).expect("atoms validated")
    }

    pub fn eta_of(&self, q: f64) -> f64 {
        1.0 - (2.0 - 2.0 * self.params.order()) / q
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let ParamsConfig { dim, s } = self.params;
        let params = FracParams::new(dim, s).map_err(|e| invalid(format!("params: {e}")))?;
        let exp = self.experiment;
        let x = self.exponents.clone().unwrap_or_default();

        let default_atoms = vec![Atom {
            point: vec![0.0; dim],
            weight: 1.0,
        }];
        let atoms: Vec<Atom> = match &self.atoms {
            Some(list) => list
                .iter()
                .map(|a| Atom {
                    point: a.point.clone(),
                    weight: a.weight,
                })
                .collect(),
            None => default_atoms,
        };
        for (i, a) in atoms.iter().enumerate() {
            if a.point.len() != dim {
                return Err(invalid(format!("atoms[{i}]: point has {} coordinates, N = {dim}", a.point.len())));
            }
            if !(a.weight.is_finite() && a.point.iter().all(|c| c.is_finite())) {
                return Err(invalid(format!("atoms[{i}]: non-finite entry")));
            }
        }
        if exp == Experiment::FundamentalSolution && atoms.len() != 1 {
            return Err(invalid("fundamental_solution takes exactly one atom"));
        }

        // Largest power of two with n^N <= 2^18, for N > 2.
        let small = 1usize << (18 / dim);
        let (grid_default, refine_default) = match (exp, dim) {
            (Experiment::YoungSuite, 2) => (grid(1.0, vec![48]), grid(1.0, vec![48])),
            (Experiment::YoungSuite, _) => (grid(1.0, vec![small / 4]), grid(1.0, vec![small / 4])),
            (Experiment::Lemma24Suite, 2) => (grid(0.5, vec![32]), grid(0.5, vec![32])),
            (Experiment::Lemma24Suite, _) => (grid(0.5, vec![small / 4]), grid(0.5, vec![small / 4])),
            (Experiment::EmbeddingSuite, 2) => (grid(1.0, vec![64]), grid(1.0, vec![64])),
            (Experiment::EmbeddingSuite, _) => (grid(1.0, vec![3 * small / 8]), grid(1.0, vec![3 * small / 8])),
            (_, 2) => (grid(1.5, vec![256]), grid(1.0, vec![128, 256, 512])),
            _ => (grid(1.5, vec![small]), grid(1.0, vec![small / 4, small / 2, small])),
        };
        let grid = self.grid.clone().unwrap_or(grid_default);
        let refinement = self.refinement.clone().unwrap_or(refine_default);
        for (name, g) in [("grid", &grid), ("refinement", &refinement)] {
            if !(g.half_width.is_finite() && g.half_width > 0.0) {
                return Err(invalid(format!("{name}.half_width must be positive")));
            }
            if g.resolutions.is_empty() || g.resolutions.iter().any(|&n| n < 4) {
                return Err(invalid(format!("{name}.resolutions must be a nonempty list of sizes >= 4")));
            }
            if g.resolutions.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid(format!("{name}.resolutions must increase")));
            }
        }
        if exp == Experiment::DualityConvergence {
            if refinement.resolutions.len() < 3 {
                return Err(invalid("refinement.resolutions needs at least three grids"));
            }
            // Boundary cell centers must clear the battery support.
            let h = 2.0 * refinement.half_width / refinement.resolutions[0] as f64;
            if refinement.half_width - 0.5 * h <= BATTERY_REACH {
                return Err(invalid(format!(
                    "refinement: outermost cell centers at {} do not clear the test functions (need > {BATTERY_REACH})",
                    refinement.half_width - 0.5 * h
                )));
            }
        }

        let mollifier = self.mollifier.unwrap_or(if dim == 2 {
            MollifierConfig {
                profile: MollifierProfile::GaussianTruncated,
                bandwidth: 0.2,
                levels: 4,
            }
        } else {
            let h = 2.0 * grid.half_width / *grid.resolutions.last().unwrap() as f64;
            MollifierConfig {
                profile: MollifierProfile::PolynomialBump,
                bandwidth: 9.0 * h,
                levels: 3,
            }
        });
        if !(mollifier.bandwidth.is_finite() && mollifier.bandwidth > 0.0) {
            return Err(invalid("mollifier.bandwidth must be positive"));
        }
        if mollifier.levels < 3 {
            return Err(invalid("mollifier.levels must be at least 3"));
        }
        if exp == Experiment::DualityConvergence {
            let h = 2.0 * grid.half_width / *grid.resolutions.last().expect("nonempty") as f64;
            let finest = mollifier.bandwidth * 0.5f64.powi(mollifier.levels as i32 - 1);
            if finest < 2.0 * h {
                return Err(invalid(format!(
                    "mollifier: finest bandwidth {finest} is below two grid cells ({})",
                    2.0 * h
                )));
            }
            let spec = MollifierSpec::new(mollifier.bandwidth, mollifier.profile)
                .map_err(|e| invalid(format!("mollifier: {e}")))?;
            let reach = atoms.iter().map(|a| fracdual::grid::norm(&a.point)).fold(0.1, f64::max)
                + spec.support_radius();
            if reach >= grid.half_width {
                return Err(invalid(format!(
                    "mollifier: mollified atoms reach radius {reach}, beyond grid.half_width {}",
                    grid.half_width
                )));
            }
        }

        let ball_radius = self.ball_radius.unwrap_or(1.0);
        if !(ball_radius.is_finite() && ball_radius > 0.0) {
            return Err(invalid("ball_radius must be positive"));
        }
        if exp == Experiment::RegularitySweep {
            if let Some((first, rest)) = atoms.split_first() {
                if rest
                    .iter()
                    .any(|a| fracdual::grid::distance(&a.point, &first.point) <= ball_radius)
                {
                    return Err(invalid(
                        "regularity_sweep: atoms after the first must lie outside the ball about the first",
                    ));
                }
            }
        }
        if exp == Experiment::DualityConvergence && ball_radius >= grid.half_width {
            return Err(invalid("ball_radius must be below grid.half_width"));
        }

        let lebesgue = x.lebesgue.unwrap_or_else(|| vec![2.0, 3.0, 3.9, 4.0, 4.5]);
        if let Some(r) = lebesgue.iter().find(|r| !(**r >= 1.0 && r.is_finite())) {
            return Err(invalid(format!("exponents.lebesgue: r = {r} must be >= 1")));
        }
        let sobolev_default = match exp {
            Experiment::DualityConvergence | Experiment::EmbeddingSuite => vec![1.5],
            _ => vec![1.2, 1.5, 1.7, 1.9],
        };
        let sobolev_q = x.sobolev_q.unwrap_or(sobolev_default);
        if let Some(q) = sobolev_q.iter().find(|q| !(**q >= 1.0 && q.is_finite())) {
            return Err(invalid(format!("exponents.sobolev_q: q = {q} must be >= 1")));
        }
        if exp == Experiment::DualityConvergence && sobolev_q.len() != 1 {
            return Err(invalid("duality_convergence takes exactly one sobolev_q"));
        }
        let sigma = x.sigma.unwrap_or_else(|| vec![2.0]);
        if let Some(v) = sigma.iter().find(|v| !(**v > 1.0 && v.is_finite())) {
            return Err(invalid(format!("exponents.sigma: {v} must exceed 1")));
        }
        let young = x.young.unwrap_or_else(|| vec![[1.0, 2.0], [4.0 / 3.0, 4.0 / 3.0], [1.0, 1.0]]);
        for [p, q] in &young {
            if fracdual::duality::young_exponent(*p, *q).is_err() {
                return Err(invalid(format!("exponents.young: (p, q) = ({p}, {q}) needs p, q >= 1 and 1/p + 1/q >= 1")));
            }
        }
        let widths = x.widths.unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        if let Some(w) = widths.iter().find(|w| !(**w > 0.0 && **w < ball_radius)) {
            return Err(invalid(format!("exponents.widths: {w} must lie in (0, ball_radius)")));
        }

        let levels = self.levels.unwrap_or(6);
        if levels < 3 {
            return Err(invalid("levels must be at least 3"));
        }
        let trials = self.trials.unwrap_or(match exp {
            Experiment::YoungSuite => 50,
            _ => 10,
        });
        if trials == 0 {
            return Err(invalid("trials must be positive"));
        }

        Ok(Resolved {
            experiment: exp,
            params,
            atoms,
            grid,
            refinement,
            mollifier,
            lebesgue,
            sobolev_q,
            sigma,
            young,
            widths,
            ball_radius,
            levels,
            trials,
            seed: self.seed,
        })
    }
}

fn grid(half_width: f64, resolutions: Vec<usize>) -> GridConfig {
    GridConfig {
        half_width,
        resolutions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Resolved, ConfigError> {
        ExperimentConfig::from_json(text)?.resolve()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let r = parse(r#"{"experiment":"fundamental_solution","params":{"N":2,"s":0.75}}"#).unwrap();
        assert_eq!(r.lebesgue, vec![2.0, 3.0, 3.9, 4.0, 4.5]);
        assert_eq!(r.atoms.len(), 1);
        assert_eq!(r.seed, 0);
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = parse(r#"{"experiment":"young_suite","params":{"N":2,"s":0.75},"colour":1}"#);
        assert!(matches!(e, Err(ConfigError::Parse(_))));
        let e = parse(r#"{"experiment":"young_suite","params":{"N":2,"s":0.75,"t":1}}"#);
        assert!(matches!(e, Err(ConfigError::Parse(_))));
    }

    #[test]
    fn rejects_order_outside_range() {
        let e = parse(r#"{"experiment":"young_suite","params":{"N":2,"s":0.4}}"#).unwrap_err();
        assert!(e.to_string().contains("(1/2, 1)"));
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"{"experiment":"duality_convergence","params":{"N":2,"s":0.75},"atoms":[],
            "mollifier":{"profile":"polynomial_bump","bandwidth":0.3,"levels":3},"seed":9}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&echo).unwrap(), cfg);
    }

    #[test]
    fn checks_atom_dimension() {
        let e = parse(r#"{"experiment":"regularity_sweep","params":{"N":3,"s":0.75},"atoms":[{"point":[0,0],"weight":1}]}"#);
        assert!(matches!(e, Err(ConfigError::Invalid(_))));
    }
}
