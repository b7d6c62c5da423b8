//! Brute-force oracles and seeded generators used by the test suites to
//! cross-check the library. Every oracle here takes a deliberately direct
//! route that shares no code with the implementation it validates.

use rand::Rng;

use crate::geometry::{BBox, Detection};
use crate::geometry::GroundTruthBox;
use crate::metrics::PRPoint;

/// IoU of two integer-corner boxes by counting unit lattice cells.
///
/// A cell `(i, j)` covers `[i, i+1) x [j, j+1)`; a box with integer corners
/// covers exactly `width * height` cells, so cell counting reproduces the
/// area arithmetic without performing it.
pub fn pixel_grid_iou(a: &BBox, b: &BBox) -> f64 {
    let cells = |bx: &BBox| -> Vec<(i64, i64)> {
        let (x0, y0, x1, y1) = (
            bx.x_min() as i64,
            bx.y_min() as i64,
            bx.x_max() as i64,
            bx.y_max() as i64,
        );
        let mut out = Vec::new();
        for i in x0..x1 {
            for j in y0..y1 {
                out.push((i, j));
            }
        }
        out
    };
    let ca = cells(a);
    let cb = cells(b);
    let inter = ca.iter().filter(|c| cb.contains(c)).count();
    let union = ca.len() + cb.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Direct O(n^2) transcription of greedy per-class suppression: repeatedly
/// take the highest-confidence remaining detection (lowest input index on
/// ties) and drop same-class detections overlapping it at or above the
/// threshold.
pub fn brute_force_nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut remaining: Vec<(usize, Detection)> = dets.iter().copied().enumerate().collect();
    let mut kept = Vec::new();
    while !remaining.is_empty() {
        let mut best = 0;
        for pos in 1..remaining.len() {
            let (ci, cd) = (&remaining[pos].0, &remaining[pos].1);
            let (bi, bd) = (&remaining[best].0, &remaining[best].1);
            if cd.confidence() > bd.confidence()
                || (cd.confidence() == bd.confidence() && ci < bi)
            {
                best = pos;
            }
        }
        let (_, winner) = remaining.remove(best);
        kept.push(winner);
        remaining.retain(|(_, d)| {
            d.class_id() != winner.class_id() || winner.bbox().iou(d.bbox()) < iou_threshold
        });
    }
    kept
}

/// Size of the maximum one-to-one matching between predictions and ground
/// truths where a pair is admissible iff the classes agree and the IoU
/// reaches the threshold. Exhaustive recursion; keep the instance small.
pub fn max_matching_size(
    preds: &[Detection],
    gts: &[GroundTruthBox],
    iou_threshold: f64,
) -> usize {
    fn recurse(
        admissible: &[Vec<usize>],
        pred: usize,
        taken: &mut Vec<bool>,
    ) -> usize {
        if pred == admissible.len() {
            return 0;
        }
        let mut best = recurse(admissible, pred + 1, taken); // leave this pred unmatched
        for &g in &admissible[pred] {
            if !taken[g] {
                taken[g] = true;
                best = best.max(1 + recurse(admissible, pred + 1, taken));
                taken[g] = false;
            }
        }
        best
    }

    let admissible: Vec<Vec<usize>> = preds
        .iter()
        .map(|p| {
            gts.iter()
                .enumerate()
                .filter(|(_, g)| {
                    g.class_id == p.class_id() && p.bbox().iou(&g.bbox) >= iou_threshold
                })
                .map(|(gi, _)| gi)
                .collect()
        })
        .collect();
    let mut taken = vec![false; gts.len()];
    recurse(&admissible, 0, &mut taken)
}

/// All-point interpolated AP by direct integration of the precision
/// envelope: split `[0, max recall]` at the distinct recall breakpoints and
/// sample the envelope at each open segment's midpoint, which is exact for a
/// step function.
pub fn riemann_ap(points: &[PRPoint]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let envelope_at = |r: f64| {
        points
            .iter()
            .filter(|p| p.recall >= r)
            .map(|p| p.precision)
            .fold(0.0, f64::max)
    };
    let mut recalls: Vec<f64> = points.iter().map(|p| p.recall).collect();
    recalls.push(0.0);
    recalls.sort_by(f64::total_cmp);
    recalls.dedup();
    let mut ap = 0.0;
    for pair in recalls.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        ap += (hi - lo) * envelope_at((lo + hi) / 2.0);
    }
    ap
}

/// Random integer-corner box with coordinates in `[0, span]`; degenerate
/// boxes are possible and intended.
pub fn random_int_box<R: Rng>(rng: &mut R, span: i64) -> BBox {
    let mut xs = [rng.random_range(0..=span), rng.random_range(0..=span)];
    let mut ys = [rng.random_range(0..=span), rng.random_range(0..=span)];
    xs.sort_unstable();
    ys.sort_unstable();
    BBox::new(xs[0] as f64, ys[0] as f64, xs[1] as f64, ys[1] as f64).unwrap()
}

/// Random real-valued box inside `[0, span]^2`.
pub fn random_box<R: Rng>(rng: &mut R, span: f64) -> BBox {
    let mut xs = [rng.random_range(0.0..span), rng.random_range(0.0..span)];
    let mut ys = [rng.random_range(0.0..span), rng.random_range(0.0..span)];
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    BBox::new(xs[0], ys[0], xs[1], ys[1]).unwrap()
}

/// Random detections over `classes` classes inside `[0, span]^2`.
pub fn random_detections<R: Rng>(
    rng: &mut R,
    n: usize,
    classes: u32,
    span: f64,
) -> Vec<Detection> {
    (0..n)
        .map(|_| {
            Detection::new(
                random_box(rng, span),
                rng.random_range(0..classes),
                rng.random_range(0.0..=1.0),
            )
            .unwrap()
        })
        .collect()
}
