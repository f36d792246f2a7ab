//! Configuration-driven experiments on top of `fracdual`.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ConfigError, Experiment, ExperimentConfig, Resolved};
pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "results.csv";
pub const DEFAULT_OUT: &str = "fracdual-out";

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Report,
    pub out_dir: PathBuf,
}

/// Runs the experiment and writes the report and table into `out_dir`
/// (falling back to the config's `output` field).
pub fn run(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutcome, ConfigError> {
    let resolved = config.resolve()?;
    let out_dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&out_dir).map_err(|source| ConfigError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let start = Instant::now();
    let result = experiments::run(&resolved);
    let wall = start.elapsed().as_secs_f64();
    let (outcome, error) = match result {
        Ok(o) => (o, None),
        Err(e) => (experiments::Outcome::default(), Some(e.to_string())),
    };
    let first_failure = outcome.items.iter().find(|i| !i.pass).map(|i| i.name.clone());
    let pass = error.is_none() && first_failure.is_none();
    let report = Report {
        experiment: resolved.experiment.name().to_string(),
        config: config.clone(),
        resolved: resolved.clone(),
        pass,
        first_failure,
        error: error.clone(),
        wall_time_seconds: wall,
        summary: outcome.summary,
        items: outcome.items,
    };
    let io = |source| ConfigError::Io {
        path: out_dir.display().to_string(),
        source,
    };
    report::write_json(&out_dir.join(REPORT_FILE), &report).map_err(io)?;
    report::write_csv(&out_dir.join(CSV_FILE), &resolved, &outcome.rows).map_err(io)?;
    let exit_code = match (error, pass) {
        (Some(_), _) => EXIT_CONFIG,
        (None, true) => EXIT_OK,
        (None, false) => EXIT_ASSERTION,
    };
    Ok(RunOutcome {
        exit_code,
        report,
        out_dir,
    })
}
