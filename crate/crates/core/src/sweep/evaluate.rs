use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{sort_rows, Condition, ResultRow, SweepConfig};
use crate::dataset::{ClassList, DatasetManifest, Split, MANIFEST_FILE};
use crate::error::Result;
use crate::metrics::{evaluate, load_evaluation_set, EvalConfig, FileIssue, MetricsReport};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepEvaluation {
    pub rows: Vec<ResultRow>,
    /// Prediction directories the grid expects but that do not exist.
    pub missing: Vec<String>,
    pub issues: Vec<FileIssue>,
}

/// Image stems to score and the class list, from the ground truth manifest
/// when there is one: its test split, or every record if that split is empty.
fn ground_truth_scope(gt_dir: &Path) -> Result<(Option<Vec<String>>, ClassList)> {
    let path = gt_dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok((None, ClassList::default()));
    }
    let manifest = DatasetManifest::load(&path)?;
    let stems = |split: Option<Split>| -> Vec<String> {
        manifest
            .records
            .iter()
            .filter(|r| split.is_none_or(|s| r.split == s))
            .filter_map(|r| r.image.file_stem().and_then(|s| s.to_str()).map(str::to_string))
            .collect()
    };
    let mut chosen = stems(Some(Split::Test));
    if chosen.is_empty() {
        chosen = stems(None);
    }
    Ok((Some(chosen), manifest.class_list.clone()))
}

pub fn row_from_report(condition: &Condition, input_size: u32, report: &MetricsReport) -> ResultRow {
    ResultRow {
        gsd: condition.gsd,
        q: condition.q,
        aperture: condition.aperture.name().to_string(),
        input_size,
        f1: report.f1,
        count_error: report.count_error,
        precision: report.precision,
        recall: report.recall,
        map: report.map,
        ap_cow: report.per_class_ap.get("cow").copied(),
        ap_sheep: report.per_class_ap.get("sheep").copied(),
        ap_dog: report.per_class_ap.get("dog").copied(),
    }
}

enum Cell {
    Row(ResultRow, Vec<FileIssue>),
    Missing(String),
    Failed(Vec<FileIssue>),
}

fn evaluate_cell(predictions_root: &Path, gt_root: &Path, condition: &Condition, input_size: u32, cfg: &EvalConfig) -> Cell {
    let name = condition.prediction_dir_name(input_size);
    let pred_dir = predictions_root.join(&name);
    if !pred_dir.is_dir() {
        return Cell::Missing(name);
    }
    let degraded = gt_root.join(condition.dir_name());
    let gt_dir: PathBuf = if degraded.is_dir() { degraded } else { gt_root.to_path_buf() };
    let failed = |e: crate::Error| {
        Cell::Failed(vec![FileIssue {
            path: pred_dir.clone(),
            message: e.to_string(),
        }])
    };
    let (stems, classes) = match ground_truth_scope(&gt_dir) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let set = match load_evaluation_set(&pred_dir, &gt_dir, stems.as_deref()) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    match evaluate(&set.images, &classes, cfg) {
        Ok(report) => Cell::Row(row_from_report(condition, input_size, &report), set.issues),
        Err(e) => {
            let mut issues = set.issues;
            issues.push(FileIssue {
                path: pred_dir.clone(),
                message: e.to_string(),
            });
            Cell::Failed(issues)
        }
    }
}

/// Scores `predictions_root/<condition>_i<input size>/` for every condition
/// and input size of the grid.
///
/// Ground truth is read from `gt_root/<condition>/` when that directory
/// exists (the output of a degradation sweep) and from `gt_root` otherwise.
/// Missing prediction directories and unreadable files are reported rather
/// than aborting the sweep.
pub fn evaluate_sweep(predictions_root: &Path, gt_root: &Path, cfg: &SweepConfig) -> Result<SweepEvaluation> {
    cfg.validate()?;
    let eval_cfg = EvalConfig::with_iou(cfg.iou_threshold)?;
    let cells: Vec<(Condition, u32)> = cfg
        .conditions()
        .into_iter()
        .flat_map(|c| cfg.input_sizes.iter().map(move |&s| (c, s)))
        .collect();
    let results: Vec<Cell> = cells
        .par_iter()
        .map(|(c, s)| evaluate_cell(predictions_root, gt_root, c, *s, &eval_cfg))
        .collect();

    let mut out = SweepEvaluation::default();
    for cell in results {
        match cell {
            Cell::Row(row, issues) => {
                out.rows.push(row);
                out.issues.extend(issues);
            }
            Cell::Missing(name) => out.missing.push(name),
            Cell::Failed(issues) => out.issues.extend(issues),
        }
    }
    sort_rows(&mut out.rows);
    Ok(out)
}
