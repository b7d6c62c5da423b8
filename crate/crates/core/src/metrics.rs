//! Detection-to-ground-truth matching, precision/recall/AP curves, and the
//! relative-error measure used for count and yield evaluation.

use thiserror::Error;

use crate::geometry::{Detection, GroundTruthBox};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("relative error is undefined for truth = 0")]
    ZeroTruth,
    #[error("invalid PR curve: {0}")]
    InvalidCurve(String),
}

/// One ranked prediction after matching: its input index, confidence, and the
/// ground-truth index it matched (`None` for a false positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub det_index: usize,
    pub confidence: f64,
    pub matched_gt: Option<usize>,
}

/// Outcome of greedy one-to-one matching. Every ground-truth box is matched
/// at most once; `true_positives.len() + false_negative_count` equals the
/// number of ground-truth boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub true_positives: Vec<MatchRecord>,
    pub false_positives: Vec<MatchRecord>,
    pub false_negative_count: usize,
}

/// Greedy one-to-one matching by descending confidence.
///
/// Each prediction takes its best-IoU unmatched same-class ground truth when
/// that IoU reaches `iou_threshold`, otherwise it is a false positive.
/// IoU ties break toward the lowest ground-truth index; confidence ties
/// between predictions break by input index. Greedy, not optimal, is the
/// contract.
pub fn match_detections(
    preds: &[Detection],
    gts: &[GroundTruthBox],
    iou_threshold: f64,
) -> MatchResult {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b]
            .confidence()
            .total_cmp(&preds[a].confidence())
            .then(a.cmp(&b))
    });

    let mut gt_taken = vec![false; gts.len()];
    let mut true_positives = Vec::new();
    let mut false_positives = Vec::new();

    for &pi in &order {
        let pred = &preds[pi];
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt_taken[gi] || gt.class_id != pred.class_id() {
                continue;
            }
            let overlap = pred.bbox().iou(&gt.bbox);
            let better = match best {
                None => true,
                Some((_, best_iou)) => overlap > best_iou,
            };
            if better {
                best = Some((gi, overlap));
            }
        }
        let record = |matched| MatchRecord {
            det_index: pi,
            confidence: pred.confidence(),
            matched_gt: matched,
        };
        match best {
            Some((gi, overlap)) if overlap >= iou_threshold => {
                gt_taken[gi] = true;
                true_positives.push(record(Some(gi)));
            }
            _ => false_positives.push(record(None)),
        }
    }

    let false_negative_count = gt_taken.iter().filter(|taken| !**taken).count();
    MatchResult {
        true_positives,
        false_positives,
        false_negative_count,
    }
}

/// A (recall, precision) point of the ranked-prefix sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Precision/recall curve swept over confidence rank. Recall is
/// non-decreasing along the point list and every value lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PRCurve {
    points: Vec<PRPoint>,
}

impl PRCurve {
    /// Validating constructor for externally-built curves (oracles, fixtures).
    pub fn from_points(points: Vec<PRPoint>) -> Result<Self, MetricsError> {
        for pair in points.windows(2) {
            if pair[1].recall < pair[0].recall {
                return Err(MetricsError::InvalidCurve(
                    "recall must be non-decreasing".into(),
                ));
            }
        }
        for p in &points {
            let ok = (0.0..=1.0).contains(&p.recall) && (0.0..=1.0).contains(&p.precision);
            if !ok {
                return Err(MetricsError::InvalidCurve(format!(
                    "point ({}, {}) outside [0, 1]",
                    p.recall, p.precision
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[PRPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sweeps confidence rank from highest to lowest and emits
/// `(TP/total_gt, TP/(TP+FP))` at each prefix. With `total_gt == 0` the
/// recall is defined as 0 throughout. Empty predictions yield an empty curve.
pub fn precision_recall_curve(matched: &MatchResult, total_gt: usize) -> PRCurve {
    let mut ranked: Vec<&MatchRecord> = matched
        .true_positives
        .iter()
        .chain(matched.false_positives.iter())
        .collect();
    ranked.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.det_index.cmp(&b.det_index))
    });

    let mut points = Vec::with_capacity(ranked.len());
    let mut tp = 0usize;
    let mut fp = 0usize;
    for rec in ranked {
        if rec.matched_gt.is_some() {
            tp += 1;
        } else {
            fp += 1;
        }
        let recall = if total_gt == 0 {
            0.0
        } else {
            tp as f64 / total_gt as f64
        };
        let precision = tp as f64 / (tp + fp) as f64;
        points.push(PRPoint { recall, precision });
    }
    PRCurve { points }
}

/// All-point interpolated average precision:
/// `AP = Σ (r_i − r_{i−1}) · max{precision_j : recall_j ≥ r_i}` with
/// `r_0 = 0`. An empty curve has AP 0.
pub fn average_precision(curve: &PRCurve) -> f64 {
    let pts = curve.points();
    if pts.is_empty() {
        return 0.0;
    }
    // envelope[i] = max precision at recall >= recall_i
    let mut envelope = vec![0.0; pts.len()];
    let mut running = 0.0f64;
    for (i, p) in pts.iter().enumerate().rev() {
        running = running.max(p.precision);
        envelope[i] = running;
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (p, env) in pts.iter().zip(&envelope) {
        ap += (p.recall - prev_recall) * env;
        prev_recall = p.recall;
    }
    ap
}

/// `|predicted − truth| / |truth|`, the per-tree count/yield error measure.
/// Undefined for `truth == 0`.
pub fn relative_error(predicted: f64, truth: f64) -> Result<f64, MetricsError> {
    if truth == 0.0 {
        return Err(MetricsError::ZeroTruth);
    }
    Ok((predicted - truth).abs() / truth.abs())
}

/// Per-scene evaluation outcome. When a rate is undefined (no predictions
/// for precision, no ground truth for recall) it is reported as 1.0 with the
/// matching `*_defined` flag cleared, so reports never carry NaN.
#[derive(Debug, Clone)]
pub struct SceneMetrics {
    pub precision: f64,
    pub precision_defined: bool,
    pub recall: f64,
    pub recall_defined: bool,
    pub average_precision: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub gt_count: usize,
    /// Detections that survived confidence filtering and entered matching.
    pub detection_count: usize,
    pub curve: PRCurve,
}

#[derive(Debug, Clone, Copy)]
pub struct AggregateRates {
    pub precision: f64,
    pub precision_defined: bool,
    pub recall: f64,
    pub recall_defined: bool,
}

/// Dataset-level report: per-scene metrics plus micro (pooled TP/FP/FN) and
/// macro (mean of per-scene rates) aggregates, and the macro-averaged AP.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub scenes: Vec<SceneMetrics>,
    pub micro: AggregateRates,
    pub macro_avg: AggregateRates,
    pub mean_average_precision: f64,
    pub total_gt: usize,
    pub total_detections: usize,
}

fn rate(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (1.0, false)
    } else {
        (num as f64 / den as f64, true)
    }
}

/// Evaluates one scene after confidence filtering.
pub fn evaluate_scene(
    preds: &[Detection],
    gts: &[GroundTruthBox],
    conf_threshold: f64,
    iou_threshold: f64,
) -> SceneMetrics {
    let kept = crate::geometry::filter_confidence(preds, conf_threshold);
    let matched = match_detections(&kept, gts, iou_threshold);
    let tp = matched.true_positives.len();
    let fp = matched.false_positives.len();
    let fn_count = matched.false_negative_count;
    let curve = precision_recall_curve(&matched, gts.len());
    let ap = average_precision(&curve);
    let (precision, precision_defined) = rate(tp, tp + fp);
    let (recall, recall_defined) = rate(tp, gts.len());
    SceneMetrics {
        precision,
        precision_defined,
        recall,
        recall_defined,
        average_precision: ap,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_count,
        gt_count: gts.len(),
        detection_count: kept.len(),
        curve,
    }
}

/// Evaluates a list of `(predictions, ground truths)` scenes and aggregates.
pub fn evaluate_dataset(
    scenes: &[(Vec<Detection>, Vec<GroundTruthBox>)],
    conf_threshold: f64,
    iou_threshold: f64,
) -> EvalReport {
    let per_scene: Vec<SceneMetrics> = scenes
        .iter()
        .map(|(preds, gts)| evaluate_scene(preds, gts, conf_threshold, iou_threshold))
        .collect();

    let pooled_tp: usize = per_scene.iter().map(|s| s.true_positives).sum();
    let pooled_fp: usize = per_scene.iter().map(|s| s.false_positives).sum();
    let total_gt: usize = per_scene.iter().map(|s| s.gt_count).sum();
    let total_detections: usize = per_scene.iter().map(|s| s.detection_count).sum();

    let (micro_p, micro_p_def) = rate(pooled_tp, pooled_tp + pooled_fp);
    let (micro_r, micro_r_def) = rate(pooled_tp, total_gt);

    let n = per_scene.len();
    let (macro_p, macro_r, mean_ap, macro_defined) = if n == 0 {
        (1.0, 1.0, 0.0, false)
    } else {
        let p = per_scene.iter().map(|s| s.precision).sum::<f64>() / n as f64;
        let r = per_scene.iter().map(|s| s.recall).sum::<f64>() / n as f64;
        let ap = per_scene.iter().map(|s| s.average_precision).sum::<f64>() / n as f64;
        (p, r, ap, true)
    };

    EvalReport {
        scenes: per_scene,
        micro: AggregateRates {
            precision: micro_p,
            precision_defined: micro_p_def,
            recall: micro_r,
            recall_defined: micro_r_def,
        },
        macro_avg: AggregateRates {
            precision: macro_p,
            precision_defined: macro_defined,
            recall: macro_r,
            recall_defined: macro_defined,
        },
        mean_average_precision: mean_ap,
        total_gt,
        total_detections,
    }
}
