use crate::dataset::BoundingBox;

use super::{Detection, EvalConfig};

/// Intersection over union of two boxes in the same normalized frame.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.right().min(b.right()) - a.left().max(b.left())).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.top().max(b.top())).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).min(1.0)
}

/// Indices of `dets` by confidence, highest first; equal confidences keep
/// input order.
pub(crate) fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&i, &j| dets[j].confidence.total_cmp(&dets[i].confidence));
    order
}

/// Greedy one-to-one matching of one image's detections of a single class.
///
/// Detections are visited from the most to the least confident and each
/// claims the still unmatched ground truth box with the highest IoU, provided
/// that IoU reaches the threshold. Flags are returned in input order, `true`
/// for a true positive.
pub fn match_detections(dets: &[Detection], gts: &[BoundingBox], cfg: &EvalConfig) -> Vec<bool> {
    let mut flags = vec![false; dets.len()];
    let mut taken = vec![false; gts.len()];
    for i in confidence_order(dets) {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let v = iou(&dets[i].bbox, gt);
            if v >= cfg.iou_threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
            flags[i] = true;
        }
    }
    flags
}
