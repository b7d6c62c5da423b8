//! Detection-head loss numerics: the composite hard loss over objectness,
//! class, and box terms, and the temperature-softened distillation loss.

use super::softmax::{bce_with_logits, bernoulli_kl, log_softmax_unchecked, softened_class_kl};
use super::{DistillConfig, DistillError};

/// One grid cell of raw head output: an objectness logit, class logits, and
/// four box values.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPrediction {
    pub objectness_logit: f64,
    pub class_logits: Vec<f64>,
    pub bbox: [f64; 4],
}

/// Raw head output over a fixed grid. All cells carry the same class count.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutput {
    cells: Vec<CellPrediction>,
    num_classes: usize,
}

impl HeadOutput {
    pub fn new(cells: Vec<CellPrediction>) -> Result<Self, DistillError> {
        let num_classes = match cells.first() {
            Some(c) => c.class_logits.len(),
            None => return Err(DistillError::ShapeMismatch("head has no cells".into())),
        };
        if num_classes == 0 {
            return Err(DistillError::ShapeMismatch(
                "cells must carry at least one class logit".into(),
            ));
        }
        for (i, c) in cells.iter().enumerate() {
            if c.class_logits.len() != num_classes {
                return Err(DistillError::ShapeMismatch(format!(
                    "cell {i} has {} class logits, expected {num_classes}",
                    c.class_logits.len()
                )));
            }
        }
        Ok(Self { cells, num_classes })
    }

    pub fn cells(&self) -> &[CellPrediction] {
        &self.cells
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }
}

/// Ground truth for one cell. `class_id` and `bbox` are meaningful only when
/// an object is present; `class_id` is the index of the one-hot class vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTarget {
    pub object_present: bool,
    pub class_id: usize,
    pub bbox: [f64; 4],
}

/// Ground-truth grid matching a [`HeadOutput`] cell for cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub cells: Vec<CellTarget>,
}

/// Composite hard-loss breakdown. `total = objectness + class + bbox`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardLossBreakdown {
    pub objectness: f64,
    pub class: f64,
    pub bbox: f64,
    pub total: f64,
}

/// Composite detection loss against ground truth.
///
/// - objectness: mean binary cross-entropy of `sigmoid(objectness logit)`
///   against the 0/1 target over all cells;
/// - class: mean cross-entropy of the softmax class logits against the
///   one-hot class on object cells;
/// - bbox: mean squared error over the box components of object cells.
///
/// With no object cells the class and box terms are zero and the total is
/// the objectness term alone.
pub fn yolo_hard_loss(
    pred: &HeadOutput,
    target: &TargetSet,
) -> Result<HardLossBreakdown, DistillError> {
    if pred.cells.len() != target.cells.len() {
        return Err(DistillError::ShapeMismatch(format!(
            "prediction has {} cells, target has {}",
            pred.cells.len(),
            target.cells.len()
        )));
    }

    let mut obj_sum = 0.0;
    let mut class_sum = 0.0;
    let mut bbox_sum = 0.0;
    let mut positives = 0usize;

    for (cell, t) in pred.cells.iter().zip(&target.cells) {
        let y = if t.object_present { 1.0 } else { 0.0 };
        obj_sum += bce_with_logits(cell.objectness_logit, y);
        if t.object_present {
            if t.class_id >= pred.num_classes {
                return Err(DistillError::LabelOutOfRange {
                    label: t.class_id,
                    classes: pred.num_classes,
                });
            }
            let log_probs = log_softmax_unchecked(&cell.class_logits);
            class_sum += -log_probs[t.class_id];
            for k in 0..4 {
                let d = cell.bbox[k] - t.bbox[k];
                bbox_sum += d * d;
            }
            positives += 1;
        }
    }

    let objectness = obj_sum / pred.cells.len() as f64;
    let (class, bbox) = if positives == 0 {
        (0.0, 0.0)
    } else {
        (
            class_sum / positives as f64,
            bbox_sum / (4 * positives) as f64,
        )
    };
    Ok(HardLossBreakdown {
        objectness,
        class,
        bbox,
        total: objectness + class + bbox,
    })
}

/// Distillation loss breakdown. The hard part is unweighted; the soft
/// components are per-cell means before the `lambda_soft * T^2` weighting,
/// and `total` applies the configured mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistillLossBreakdown {
    pub hard: HardLossBreakdown,
    /// Mean softened class KL, `KL(softmax_T(teacher) || softmax_T(student))`.
    pub soft_class_kl: f64,
    /// Mean objectness KL between the teacher and student Bernoulli heads.
    pub soft_objectness: f64,
    /// `lambda_hard * hard.total + lambda_soft * T^2 * (soft_class_kl + soft_objectness)`.
    pub total: f64,
}

/// Response-based distillation loss: the hard loss against ground truth plus
/// the temperature-softened teacher terms on the class and objectness heads.
///
/// The soft term is zero exactly when the student and teacher heads agree.
pub fn distillation_loss(
    student: &HeadOutput,
    teacher: &HeadOutput,
    target: &TargetSet,
    cfg: &DistillConfig,
) -> Result<DistillLossBreakdown, DistillError> {
    cfg.validate()?;
    if student.cells.len() != teacher.cells.len() || student.num_classes != teacher.num_classes {
        return Err(DistillError::ShapeMismatch(format!(
            "student grid {}x{} classes vs teacher {}x{}",
            student.cells.len(),
            student.num_classes,
            teacher.cells.len(),
            teacher.num_classes
        )));
    }
    let hard = yolo_hard_loss(student, target)?;

    let n = student.cells.len() as f64;
    let mut kl_sum = 0.0;
    let mut obj_sum = 0.0;
    for (s, t) in student.cells.iter().zip(&teacher.cells) {
        kl_sum += softened_class_kl(&t.class_logits, &s.class_logits, cfg.temperature);
        obj_sum += bernoulli_kl(t.objectness_logit, s.objectness_logit);
    }
    let soft_class_kl = kl_sum / n;
    let soft_objectness = obj_sum / n;

    let total = cfg.lambda_hard * hard.total
        + cfg.lambda_soft
            * cfg.temperature
            * cfg.temperature
            * (soft_class_kl + soft_objectness);
    Ok(DistillLossBreakdown {
        hard,
        soft_class_kl,
        soft_objectness,
        total,
    })
}
