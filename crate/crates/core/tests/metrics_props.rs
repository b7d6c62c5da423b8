//! Randomized checks of matching, the PR sweep, and AP against independent
//! oracles, plus the conservation and monotonicity invariants.

use proptest::prelude::*;

use orchard_core::geometry::{filter_confidence, BBox, Detection, GroundTruthBox};
use orchard_core::metrics::{
    average_precision, evaluate_dataset, match_detections, precision_recall_curve, PRCurve,
    PRPoint,
};
use orchard_core::testkit::{max_matching_size, random_detections, riemann_ap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_curve() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 0..20).prop_map(|mut pts| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    })
}

proptest! {
    #[test]
    fn ap_matches_riemann_oracle(raw in arb_curve()) {
        let points: Vec<PRPoint> = raw
            .iter()
            .map(|&(recall, precision)| PRPoint { recall, precision })
            .collect();
        let curve = PRCurve::from_points(points.clone()).unwrap();
        let ap = average_precision(&curve);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ap));
        let oracle = riemann_ap(&points);
        prop_assert!((ap - oracle).abs() < 1e-12, "ap {} vs oracle {}", ap, oracle);
    }
}

fn random_scene(
    rng: &mut ChaCha8Rng,
    max_preds: usize,
    max_gts: usize,
) -> (Vec<Detection>, Vec<GroundTruthBox>) {
    let preds = random_detections(rng, rng.random_range(0..=max_preds), 2, 20.0);
    let gts = random_detections(rng, rng.random_range(0..=max_gts), 2, 20.0)
        .into_iter()
        .map(|d| GroundTruthBox {
            bbox: *d.bbox(),
            class_id: d.class_id(),
        })
        .collect();
    (preds, gts)
}

#[test]
fn matching_conserves_counts_and_rates_stay_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1500 {
        let (preds, gts) = random_scene(&mut rng, 10, 10);
        let threshold = rng.random_range(0.05..=0.95);
        let m = match_detections(&preds, &gts, threshold);
        assert_eq!(
            m.true_positives.len() + m.false_positives.len(),
            preds.len(),
            "every prediction is TP or FP"
        );
        assert_eq!(
            m.true_positives.len() + m.false_negative_count,
            gts.len(),
            "every ground truth is matched or missed"
        );
        // one-to-one matching
        let mut seen = std::collections::BTreeSet::new();
        for tp in &m.true_positives {
            assert!(seen.insert(tp.matched_gt.unwrap()), "gt matched twice");
        }

        let curve = precision_recall_curve(&m, gts.len());
        for p in curve.points() {
            assert!((0.0..=1.0).contains(&p.recall));
            assert!((0.0..=1.0).contains(&p.precision));
        }
        for pair in curve.points().windows(2) {
            assert!(pair[1].recall >= pair[0].recall, "recall must not decrease");
        }
        let ap = average_precision(&curve);
        assert!((0.0..=1.0 + 1e-12).contains(&ap));
    }
}

/// Non-ambiguous instances: ground truths on a sparse grid, at most one
/// jittered prediction per ground truth, plus far-away false positives.
/// Greedy matching must then agree with the exhaustive optimal matcher both
/// in cardinality and in the matched pair set.
#[test]
fn greedy_matching_equals_exhaustive_oracle_on_unambiguous_scenes() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    for _ in 0..1200 {
        let n_gt = rng.random_range(1..=4usize);
        let mut gts = Vec::new();
        for k in 0..n_gt {
            let x = 30.0 * k as f64;
            gts.push(GroundTruthBox {
                bbox: BBox::new(x, 0.0, x + 10.0, 10.0).unwrap(),
                class_id: 0,
            });
        }
        let mut preds = Vec::new();
        let mut expected_pairs = Vec::new();
        for (gi, gt) in gts.iter().enumerate() {
            if rng.random_bool(0.7) && preds.len() < 6 {
                let jitter = rng.random_range(-1.5..1.5);
                let b = BBox::new(
                    gt.bbox.x_min() + jitter,
                    gt.bbox.y_min() + jitter,
                    gt.bbox.x_max() + jitter,
                    gt.bbox.y_max() + jitter,
                )
                .unwrap();
                preds.push(Detection::new(b, 0, rng.random_range(0.2..1.0)).unwrap());
                expected_pairs.push((preds.len() - 1, gi));
            }
        }
        while preds.len() < 6 && rng.random_bool(0.4) {
            let x = 1000.0 + 40.0 * preds.len() as f64;
            let b = BBox::new(x, 0.0, x + 5.0, 5.0).unwrap();
            preds.push(Detection::new(b, 0, rng.random_range(0.2..1.0)).unwrap());
        }

        let m = match_detections(&preds, &gts, 0.5);
        let optimal = max_matching_size(&preds, &gts, 0.5);
        assert_eq!(m.true_positives.len(), optimal, "greedy missed the optimum");

        let mut got: Vec<(usize, usize)> = m
            .true_positives
            .iter()
            .map(|tp| (tp.det_index, tp.matched_gt.unwrap()))
            .collect();
        got.sort_unstable();
        expected_pairs.sort_unstable();
        assert_eq!(got, expected_pairs, "matched pair identity differs");
    }
}

#[test]
fn raising_conf_threshold_never_increases_recall() {
    let mut rng = ChaCha8Rng::seed_from_u64(8080);
    for _ in 0..400 {
        let (preds, gts) = random_scene(&mut rng, 12, 8);
        if gts.is_empty() {
            continue;
        }
        let mut last = f64::INFINITY;
        for step in 0..=10 {
            let conf = step as f64 / 10.0;
            let kept = filter_confidence(&preds, conf);
            let m = match_detections(&kept, &gts, 0.5);
            let recall = m.true_positives.len() as f64 / gts.len() as f64;
            assert!(recall <= last + 1e-12, "recall rose with the threshold");
            last = recall;
        }
    }
}

#[test]
fn dataset_report_rates_stay_in_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let scenes: Vec<_> = (0..rng.random_range(0..5usize))
            .map(|_| random_scene(&mut rng, 8, 8))
            .collect();
        let report = evaluate_dataset(&scenes, 0.15, 0.5);
        let rates = [
            report.micro.precision,
            report.micro.recall,
            report.macro_avg.precision,
            report.macro_avg.recall,
            report.mean_average_precision,
        ];
        for r in rates {
            assert!((0.0..=1.0 + 1e-12).contains(&r), "rate {r} out of bounds");
        }
        for scene in &report.scenes {
            assert!(scene.precision >= 0.0 && scene.precision <= 1.0);
            assert!(scene.recall >= 0.0 && scene.recall <= 1.0);
            assert!(scene.average_precision >= 0.0 && scene.average_precision <= 1.0 + 1e-12);
        }
    }
}
