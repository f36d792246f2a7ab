use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, Resolved};
use crate::experiments::{Item, Row};

pub const CSV_HEADER: [&str; 7] = ["experiment", "N", "s", "param", "level", "value", "flag"];

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub resolved: Resolved,
    pub pass: bool,
    pub first_failure: Option<String>,
    pub error: Option<String>,
    pub wall_time_seconds: f64,
    pub summary: Value,
    pub items: Vec<Item>,
}

/// Fixed-width scientific notation so reruns are byte-identical.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        format!("{x}")
    }
}

pub fn write_csv(path: &Path, cfg: &Resolved, rows: &[Row]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    let name = cfg.experiment.name();
    let dim = cfg.params.dim().to_string();
    let s = format!("{}", cfg.params.order());
    for r in rows {
        w.write_record([
            name,
            &dim,
            &s,
            &r.param,
            &format_float(r.level),
            &format_float(r.value),
            &r.flag,
        ])?;
    }
    w.flush()
}

pub fn write_json(path: &Path, report: &Report) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, report)?;
    f.write_all(b"\n")
}
