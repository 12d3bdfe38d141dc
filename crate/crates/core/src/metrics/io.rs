use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::{parse_box_line, parse_labels, LABELS_DIR};
use crate::error::{Error, Result};

use super::{Detection, ImageEval};

/// Parses `class cx cy w h confidence` lines; blank lines are skipped.
pub fn parse_predictions(text: &str) -> Result<Vec<Detection>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let (bbox, extra) = parse_box_line(l, i + 1, 1)?;
            Detection::new(bbox, extra[0]).map_err(|e| Error::Validation(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_predictions(dets: &[Detection]) -> String {
    dets.iter()
        .map(|d| {
            let b = &d.bbox;
            format!(
                "{} {:.6} {:.6} {:.6} {:.6} {:.6}\n",
                b.class_id, b.cx, b.cy, b.w, b.h, d.confidence
            )
        })
        .collect()
}

/// A file that could not be used, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileIssue {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct EvaluationSet {
    /// File stems, aligned with `images`.
    pub names: Vec<String>,
    pub images: Vec<ImageEval>,
    /// Prediction files that failed to parse; their images are left out.
    pub issues: Vec<FileIssue>,
}

/// Accepts either a directory of label files or a dataset root holding one.
fn label_dir(gt: &Path) -> PathBuf {
    let nested = gt.join(LABELS_DIR);
    if nested.is_dir() {
        nested
    } else {
        gt.to_path_buf()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Pairs `<stem>.txt` prediction files with ground truth label files.
///
/// With `stems` set only those images are loaded, otherwise every label file
/// is. An image with no prediction file has no detections. Ground truth
/// problems are fatal; malformed prediction files are reported in `issues`.
pub fn load_evaluation_set(pred_dir: &Path, gt_dir: &Path, stems: Option<&[String]>) -> Result<EvaluationSet> {
    if !pred_dir.is_dir() {
        return Err(Error::io(
            pred_dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "prediction directory not found"),
        ));
    }
    let labels = label_dir(gt_dir);
    let names: Vec<String> = match stems {
        Some(s) => s.to_vec(),
        None => {
            let mut v = Vec::new();
            for entry in std::fs::read_dir(&labels).map_err(|e| Error::io(&labels, e))? {
                let path = entry.map_err(|e| Error::io(&labels, e))?.path();
                if path.extension().and_then(|e| e.to_str()) == Some("txt") {
                    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                        v.push(stem.to_string());
                    }
                }
            }
            v.sort();
            v
        }
    };
    let mut set = EvaluationSet::default();
    for name in names {
        let gt_path = labels.join(format!("{name}.txt"));
        let ground_truth = parse_labels(&read(&gt_path)?).map_err(|e| match e {
            Error::Parse { line, message } => Error::Validation(format!("{}:{line}: {message}", gt_path.display())),
            other => Error::Validation(format!("{}: {other}", gt_path.display())),
        })?;
        let pred_path = pred_dir.join(format!("{name}.txt"));
        let detections = if pred_path.is_file() {
            match parse_predictions(&read(&pred_path)?) {
                Ok(d) => d,
                Err(e) => {
                    set.issues.push(FileIssue {
                        path: pred_path,
                        message: e.to_string(),
                    });
                    continue;
                }
            }
        } else {
            Vec::new()
        };
        set.names.push(name);
        set.images.push(ImageEval::new(detections, ground_truth));
    }
    Ok(set)
}
