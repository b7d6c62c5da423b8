//! Response-based knowledge-distillation numerics: temperature softmax,
//! composite detection loss, soft-target loss, the slicing transform used at
//! the detector input, and a seeded teacher-to-student trainer on tiny
//! fully-connected networks with analytically derived gradients.

mod gradcheck;
mod head;
mod net;
mod softmax;
mod tensor;
mod train;

pub use gradcheck::gradcheck;
pub use head::{
    distillation_loss, yolo_hard_loss, CellPrediction, CellTarget, DistillLossBreakdown,
    HardLossBreakdown, HeadOutput, TargetSet,
};
pub use net::ToyNet;
pub use softmax::{entropy, temperature_softmax};
pub use tensor::{focus_slice, focus_unslice, Tensor3};
pub use train::{
    make_blobs, train_student, train_supervised, training_loss_and_grad, EpochLoss, LabeledSample,
    TrainOutcome,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistillError {
    #[error("temperature must be a positive finite number, got {0}")]
    InvalidTemperature(f64),
    #[error("logit vector must be non-empty")]
    EmptyLogits,
    #[error("logits must be finite")]
    NonFiniteLogits,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("slicing needs even height and width, got {height}x{width}")]
    OddSpatialDims { height: usize, width: usize },
    #[error("inverse slicing needs channels divisible by 4, got {0}")]
    ChannelsNotDivisible(usize),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("training data must be non-empty")]
    EmptyData,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
}

/// Settings for the distillation loss and the toy trainer.
///
/// `lambda_hard` weighs the ground-truth loss, `lambda_soft` the
/// temperature-softened teacher term; at least one must be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillConfig {
    pub temperature: f64,
    pub lambda_hard: f64,
    pub lambda_soft: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            temperature: 20.0,
            lambda_hard: 0.5,
            lambda_soft: 0.5,
            learning_rate: 0.9,
            epochs: 240,
            seed: 42,
        }
    }
}

impl DistillConfig {
    pub fn validate(&self) -> Result<(), DistillError> {
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(DistillError::InvalidTemperature(self.temperature));
        }
        let lambdas_ok = self.lambda_hard.is_finite()
            && self.lambda_soft.is_finite()
            && self.lambda_hard >= 0.0
            && self.lambda_soft >= 0.0
            && self.lambda_hard + self.lambda_soft > 0.0;
        if !lambdas_ok {
            return Err(DistillError::InvalidConfig(format!(
                "lambda_hard = {}, lambda_soft = {}: both must be non-negative and not both zero",
                self.lambda_hard, self.lambda_soft
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(DistillError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(DistillConfig::default().validate().is_ok());
    }

    #[test]
    fn config_rejects_bad_values() {
        let mut cfg = DistillConfig::default();
        cfg.temperature = 0.0;
        assert!(matches!(
            cfg.validate(),
            Err(DistillError::InvalidTemperature(_))
        ));

        let mut cfg = DistillConfig::default();
        cfg.lambda_hard = 0.0;
        cfg.lambda_soft = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = DistillConfig::default();
        cfg.learning_rate = -1.0;
        assert!(cfg.validate().is_err());
    }
}
