//! Full-batch gradient-descent training of the toy student network, with and
//! without a teacher, plus the seeded blob dataset used by the demo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::net::ToyNet;
use super::softmax::log_softmax_unchecked;
use super::{DistillConfig, DistillError};

/// One training sample: an input vector and a hard class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub input: Vec<f64>,
    pub label: usize,
}

/// Loss recorded once per parameter vector. `hard` and `soft` carry their
/// mixture weights (`lambda_hard * CE`, `lambda_soft * T^2 * KL`), so
/// `total = hard + soft`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub total: f64,
    pub hard: f64,
    pub soft: f64,
}

/// A trained network plus its loss history. `history[0]` is the loss at the
/// initial parameters and one entry follows per epoch, so the length is
/// `epochs + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: ToyNet,
    pub history: Vec<EpochLoss>,
}

/// Mean loss and flat parameter gradient of the distillation objective at
/// the student's current parameters.
///
/// Per sample the objective is
/// `lambda_hard * CE(softmax(student), label)
///  + lambda_soft * T^2 * KL(softmax_T(teacher) || softmax_T(student))`,
/// averaged over the dataset. With `teacher = None` or `lambda_soft = 0`
/// the soft term is skipped entirely.
pub fn training_loss_and_grad(
    student: &ToyNet,
    teacher: Option<&ToyNet>,
    data: &[LabeledSample],
    cfg: &DistillConfig,
) -> Result<(EpochLoss, Vec<f64>), DistillError> {
    if data.is_empty() {
        return Err(DistillError::EmptyData);
    }
    let classes = student.output_dim();
    for sample in data {
        if sample.label >= classes {
            return Err(DistillError::LabelOutOfRange {
                label: sample.label,
                classes,
            });
        }
    }
    let soft_active = cfg.lambda_soft != 0.0 && teacher.is_some();
    if let Some(t) = teacher {
        if t.output_dim() != classes {
            return Err(DistillError::ShapeMismatch(format!(
                "teacher emits {} classes, student {}",
                t.output_dim(),
                classes
            )));
        }
        if t.input_dim() != student.input_dim() {
            return Err(DistillError::ShapeMismatch(format!(
                "teacher expects {} inputs, student {}",
                t.input_dim(),
                student.input_dim()
            )));
        }
    }

    let n = data.len() as f64;
    let inv_n = 1.0 / n;
    let temperature = cfg.temperature;
    let mut hard_sum = 0.0;
    let mut soft_sum = 0.0;
    let mut grad = vec![0.0; student.num_params()];
    let mut dlogits = vec![0.0; classes];

    for sample in data {
        let trace = student.forward_trace(&sample.input)?;
        let logits = trace.last().unwrap();
        let log_probs = log_softmax_unchecked(logits);
        hard_sum += -log_probs[sample.label];
        for k in 0..classes {
            let q = log_probs[k].exp();
            let y = if k == sample.label { 1.0 } else { 0.0 };
            dlogits[k] = cfg.lambda_hard * (q - y) * inv_n;
        }
        if soft_active {
            let teacher_logits = teacher.unwrap().forward(&sample.input)?;
            let scaled_t: Vec<f64> = teacher_logits.iter().map(|z| z / temperature).collect();
            let scaled_s: Vec<f64> = logits.iter().map(|z| z / temperature).collect();
            let lp = log_softmax_unchecked(&scaled_t);
            let lq = log_softmax_unchecked(&scaled_s);
            let mut kl = 0.0;
            for k in 0..classes {
                // probabilities come from the same log-softmax values, so the
                // gradient is exactly zero when the logits coincide
                let p = lp[k].exp();
                let q_t = lq[k].exp();
                kl += p * (lp[k] - lq[k]);
                dlogits[k] += cfg.lambda_soft * temperature * (q_t - p) * inv_n;
            }
            soft_sum += temperature * temperature * kl;
        }
        student.accumulate_grad(&trace, &dlogits, &mut grad);
    }

    let hard = cfg.lambda_hard * hard_sum * inv_n;
    let soft = cfg.lambda_soft * soft_sum * inv_n;
    Ok((
        EpochLoss {
            total: hard + soft,
            hard,
            soft,
        },
        grad,
    ))
}

fn run_descent(
    start: &ToyNet,
    teacher: Option<&ToyNet>,
    data: &[LabeledSample],
    cfg: &DistillConfig,
) -> Result<TrainOutcome, DistillError> {
    cfg.validate()?;
    let mut net = start.clone();
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let mut params = net.params();
    for _ in 0..cfg.epochs {
        let (loss, grad) = training_loss_and_grad(&net, teacher, data, cfg)?;
        history.push(loss);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        net.set_params(&params)?;
    }
    let (final_loss, _) = training_loss_and_grad(&net, teacher, data, cfg)?;
    history.push(final_loss);
    Ok(TrainOutcome { net, history })
}

/// Full-batch gradient descent on the distillation objective. Deterministic
/// for fixed inputs; the only randomness in the pipeline is the seeded
/// network initialization and data generation.
pub fn train_student(
    teacher: &ToyNet,
    student: &ToyNet,
    data: &[LabeledSample],
    cfg: &DistillConfig,
) -> Result<TrainOutcome, DistillError> {
    run_descent(student, Some(teacher), data, cfg)
}

/// Plain supervised training: full-batch gradient descent on the mean
/// cross-entropy. Bit-identical to [`train_student`] with
/// `lambda_hard = 1, lambda_soft = 0`.
pub fn train_supervised(
    net: &ToyNet,
    data: &[LabeledSample],
    learning_rate: f64,
    epochs: usize,
) -> Result<TrainOutcome, DistillError> {
    let cfg = DistillConfig {
        temperature: 1.0,
        lambda_hard: 1.0,
        lambda_soft: 0.0,
        learning_rate,
        epochs,
        seed: 0,
    };
    run_descent(net, None, data, &cfg)
}

/// Seeded 2-D Gaussian blobs, one blob per class center, `n_per_class`
/// samples each, labels equal to the center index.
pub fn make_blobs(
    n_per_class: usize,
    centers: &[[f64; 2]],
    spread: f64,
    seed: u64,
) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).expect("finite positive spread");
    let mut data = Vec::with_capacity(n_per_class * centers.len());
    for (label, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            let x = center[0] + noise.sample(&mut rng);
            let y = center[1] + noise.sample(&mut rng);
            data.push(LabeledSample {
                input: vec![x, y],
                label,
            });
        }
    }
    data
}
