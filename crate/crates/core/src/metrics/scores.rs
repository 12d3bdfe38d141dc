use crate::error::{Error, Result};

/// Detection outcome used for ranking: confidence and whether it matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scored {
    pub confidence: f64,
    pub true_positive: bool,
}

/// All-point interpolated average precision over detections already ranked
/// from most to least confident.
///
/// Each true positive adds `1/num_gt` of recall at the best precision reached
/// at that rank or any lower one. `None` when there is no ground truth.
pub(crate) fn ranked_average_precision(ranked: &[Scored], num_gt: usize) -> Option<f64> {
    if num_gt == 0 {
        return None;
    }
    let mut precision = Vec::with_capacity(ranked.len());
    let mut tp = 0usize;
    for (k, s) in ranked.iter().enumerate() {
        tp += s.true_positive as usize;
        precision.push(tp as f64 / (k + 1) as f64);
    }
    let mut envelope = 0.0f64;
    let mut area = 0.0;
    for (k, s) in ranked.iter().enumerate().rev() {
        envelope = envelope.max(precision[k]);
        if s.true_positive {
            area += envelope;
        }
    }
    Some(area / num_gt as f64)
}

/// Operating point chosen by the F1 search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub threshold: f64,
}

impl OperatingPoint {
    const NONE: Self = Self {
        f1: 0.0,
        precision: 0.0,
        recall: 0.0,
        threshold: 0.0,
    };
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Scans every distinct confidence (and zero) as a keep-if-`≥` threshold and
/// returns the point with the highest F1, preferring the higher threshold on
/// ties.
pub(crate) fn best_f1(scored: &[Scored], num_gt: usize) -> OperatingPoint {
    if scored.is_empty() {
        return OperatingPoint::NONE;
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    let mut best = OperatingPoint::NONE;
    let mut best_set = false;
    let mut tp = 0usize;
    let mut k = 0usize;
    let mut consider = |threshold: f64, tp: usize, kept: usize, best: &mut OperatingPoint| {
        let precision = ratio(tp, kept);
        let recall = ratio(tp, num_gt);
        let f1 = if tp == 0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        // Thresholds arrive in decreasing order, so only a strict gain wins.
        if !best_set || f1 > best.f1 {
            *best = OperatingPoint {
                f1,
                precision,
                recall,
                threshold,
            };
            best_set = true;
        }
    };
    while k < sorted.len() {
        let t = sorted[k].confidence;
        while k < sorted.len() && sorted[k].confidence == t {
            tp += sorted[k].true_positive as usize;
            k += 1;
        }
        consider(t, tp, k, &mut best);
    }
    if sorted.last().is_some_and(|s| s.confidence > 0.0) {
        consider(0.0, tp, k, &mut best);
    }
    best
}

/// Mean absolute difference between detected and labelled counts per image.
pub fn count_error(counts: &[(usize, usize)]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::UndefinedMetric("count error over zero images".into()));
    }
    let total: usize = counts.iter().map(|&(d, l)| d.abs_diff(l)).sum();
    Ok(total as f64 / counts.len() as f64)
}
