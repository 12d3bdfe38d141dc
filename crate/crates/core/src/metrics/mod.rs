//! Detection scoring: IoU matching, per-class AP and mAP, F1 at the best
//! confidence threshold and mean absolute count error per image.

mod io;
mod matching;
mod scores;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{BoundingBox, ClassList};
use crate::error::{Error, Result};

pub use io::{load_evaluation_set, parse_predictions, write_predictions, EvaluationSet, FileIssue};
pub use matching::{iou, match_detections};
pub use scores::{count_error, OperatingPoint};

use scores::Scored;

/// A predicted box with the detector's confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub confidence: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Validation(format!("confidence {confidence} outside [0, 1]")));
        }
        Ok(Self { bbox, confidence })
    }

    pub fn class_id(&self) -> u32 {
        self.bbox.class_id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    /// Also report count error separately for every class.
    pub per_class_count_error: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            per_class_count_error: false,
        }
    }
}

impl EvalConfig {
    pub fn with_iou(iou_threshold: f64) -> Result<Self> {
        let cfg = Self {
            iou_threshold,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "IoU threshold must lie in (0, 1), got {}",
                self.iou_threshold
            )));
        }
        Ok(())
    }
}

/// Detections and ground truth for one image, all classes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImageEval {
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<BoundingBox>,
}

impl ImageEval {
    pub fn new(detections: Vec<Detection>, ground_truth: Vec<BoundingBox>) -> Self {
        Self {
            detections,
            ground_truth,
        }
    }

    fn of_class(&self, class_id: u32) -> (Vec<Detection>, Vec<BoundingBox>) {
        (
            self.detections.iter().filter(|d| d.class_id() == class_id).copied().collect(),
            self.ground_truth.iter().filter(|b| b.class_id == class_id).copied().collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// AP for each class with at least one ground truth box.
    pub per_class_ap: BTreeMap<String, f64>,
    pub map: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub best_threshold: f64,
    pub count_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class_count_error: Option<BTreeMap<String, f64>>,
}

/// Matches every image class by class and returns the outcomes in ranking
/// order: confidence descending, then image order, then input order.
fn scored_detections(images: &[ImageEval], cfg: &EvalConfig) -> Vec<Scored> {
    let mut out: Vec<Scored> = Vec::new();
    for img in images {
        let mut flags = vec![false; img.detections.len()];
        let mut classes: Vec<u32> = img.detections.iter().map(Detection::class_id).collect();
        classes.sort_unstable();
        classes.dedup();
        for c in classes {
            let idx: Vec<usize> = (0..img.detections.len())
                .filter(|&i| img.detections[i].class_id() == c)
                .collect();
            let dets: Vec<Detection> = idx.iter().map(|&i| img.detections[i]).collect();
            let gts: Vec<BoundingBox> = img.ground_truth.iter().filter(|b| b.class_id == c).copied().collect();
            for (k, tp) in match_detections(&dets, &gts, cfg).into_iter().enumerate() {
                flags[idx[k]] = tp;
            }
        }
        out.extend(img.detections.iter().zip(flags).map(|(d, tp)| Scored {
            confidence: d.confidence,
            true_positive: tp,
        }));
    }
    // Stable sort keeps image and input order among equal confidences.
    out.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    out
}

/// AP of one class pooled over images; boxes of other classes are ignored.
/// `None` when the class has no ground truth.
pub fn average_precision(images: &[ImageEval], class_id: u32, cfg: &EvalConfig) -> Option<f64> {
    let filtered: Vec<ImageEval> = images
        .iter()
        .map(|img| {
            let (d, g) = img.of_class(class_id);
            ImageEval::new(d, g)
        })
        .collect();
    let num_gt = filtered.iter().map(|i| i.ground_truth.len()).sum();
    scores::ranked_average_precision(&scored_detections(&filtered, cfg), num_gt)
}

/// Best-F1 operating point with classes and images pooled.
pub fn f1_best_threshold(images: &[ImageEval], cfg: &EvalConfig) -> OperatingPoint {
    let num_gt = images.iter().map(|i| i.ground_truth.len()).sum();
    scores::best_f1(&scored_detections(images, cfg), num_gt)
}

fn counts_at(images: &[ImageEval], threshold: f64, class: Option<u32>) -> Vec<(usize, usize)> {
    images
        .iter()
        .map(|img| {
            let d = img
                .detections
                .iter()
                .filter(|d| d.confidence >= threshold && class.is_none_or(|c| d.class_id() == c))
                .count();
            let l = img.ground_truth.iter().filter(|b| class.is_none_or(|c| b.class_id == c)).count();
            (d, l)
        })
        .collect()
}

/// Full report for a set of images. Count error uses the detections kept at
/// the best-F1 threshold.
pub fn evaluate(images: &[ImageEval], classes: &ClassList, cfg: &EvalConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    if images.is_empty() {
        return Err(Error::UndefinedMetric("no images to evaluate".into()));
    }
    let n_classes = classes.len() as u32;
    for img in images {
        let ids = img.detections.iter().map(Detection::class_id).chain(img.ground_truth.iter().map(|b| b.class_id));
        if let Some(bad) = ids.into_iter().find(|&c| c >= n_classes) {
            return Err(Error::Validation(format!(
                "class id {bad} not in class list of {n_classes}"
            )));
        }
    }
    let mut per_class_ap = BTreeMap::new();
    let mut ap_sum = 0.0;
    for (id, name) in classes.names().iter().enumerate() {
        if let Some(ap) = average_precision(images, id as u32, cfg) {
            per_class_ap.insert(name.clone(), ap);
            ap_sum += ap;
        }
    }
    let map = if per_class_ap.is_empty() {
        0.0
    } else {
        ap_sum / per_class_ap.len() as f64
    };
    let op = f1_best_threshold(images, cfg);
    let count_error = count_error(&counts_at(images, op.threshold, None))?;
    let per_class_count_error = if cfg.per_class_count_error {
        let mut m = BTreeMap::new();
        for (id, name) in classes.names().iter().enumerate() {
            m.insert(name.clone(), scores::count_error(&counts_at(images, op.threshold, Some(id as u32)))?);
        }
        Some(m)
    } else {
        None
    };
    Ok(MetricsReport {
        per_class_ap,
        map,
        precision: op.precision,
        recall: op.recall,
        f1: op.f1,
        best_threshold: op.threshold,
        count_error,
        per_class_count_error,
    })
}
