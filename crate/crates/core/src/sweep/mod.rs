//! Experiment grid: degrade a dataset under every (GSD, Q, aperture)
//! condition, score external detector predictions for each, and write the
//! results as CSV, gnuplot data and a JSON run report.

mod config;
mod degrade;
mod evaluate;
mod report;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::FileIssue;

pub use config::{Condition, SweepConfig, DEFAULT_GSD_TARGETS, DEFAULT_INPUT_SIZES, DEFAULT_Q_VALUES};
pub use degrade::{run_degradation_sweep, ConditionSummary, DegradationSummary, SkipRecord};
pub use evaluate::{evaluate_sweep, row_from_report, SweepEvaluation};
pub use report::{
    emit_csv, emit_plot_data, format_number, parse_csv, render_table, sort_rows, Metric, ResultRow, CSV_HEADER,
};

/// Wall-clock seconds spent in each phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub degrade_s: f64,
    pub evaluate_s: f64,
}

/// Contents of `run_report.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub started: String,
    pub degradation: Option<DegradationSummary>,
    pub missing_predictions: Vec<String>,
    pub prediction_issues: Vec<FileIssue>,
    pub rows: usize,
    pub timings: Timings,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `runs/<timestamp>/` under `out_root` with `results.csv`,
/// `plots/<metric>.dat` (when there are rows) and `run_report.json`.
/// Returns the run directory.
pub fn write_run_outputs(out_root: &Path, rows: &[ResultRow], report: &RunReport) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let runs = out_root.join("runs");
    let mut dir = runs.join(&stamp);
    let mut n = 1;
    while dir.exists() {
        dir = runs.join(format!("{stamp}-{n}"));
        n += 1;
    }
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    if !rows.is_empty() {
        write(&dir.join("results.csv"), &emit_csv(rows))?;
        for metric in Metric::ALL {
            write(&plots.join(format!("{}.dat", metric.name())), &emit_plot_data(rows, metric)?)?;
        }
    }
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write(&dir.join("run_report.json"), &(json + "\n"))?;
    Ok(dir)
}
