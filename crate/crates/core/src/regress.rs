//! Univariate linear regression by gradient descent with a closed-form
//! oracle, plus the count-correction and two-stage yield estimate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegressError {
    #[error("dataset must be non-empty")]
    EmptyData,
    #[error("closed-form fit needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("x values have zero variance; the slope is undetermined")]
    ZeroVariance,
    #[error("gradient descent diverged at epoch {epoch} (loss {loss:.3e} exceeds 1e12)")]
    Diverged { epoch: usize, loss: f64 },
    #[error("mean fruit weight must be positive, got {0}")]
    InvalidWeight(f64),
}

/// One observation: `x` the detected/tagged count, `y` the true count or
/// yield.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
}

/// The line `f(x) = a*x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub a: f64,
    pub b: f64,
}

impl LinearModel {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// Gradient-descent settings. The updates start from `(init_a, init_b)` in
/// original coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub init_a: f64,
    pub init_b: f64,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 50_000,
            init_a: 0.0,
            init_b: 0.0,
        }
    }
}

/// Gradient-descent result: the fitted line and the loss per parameter
/// vector (`history[0]` at the init, one entry per epoch after, all in
/// original coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct GdFit {
    pub model: LinearModel,
    pub history: Vec<f64>,
}

/// Sum of squared residuals `Σ (a*x_i + b − y_i)^2`.
///
/// The sum form is the normative objective; [`mse_mean`] exposes the
/// mean-form variant.
pub fn mse(model: &LinearModel, data: &[DataPoint]) -> Result<f64, RegressError> {
    if data.is_empty() {
        return Err(RegressError::EmptyData);
    }
    Ok(data
        .iter()
        .map(|p| {
            let r = model.predict(p.x) - p.y;
            r * r
        })
        .sum())
}

/// Mean of squared residuals, the labeled mean-form variant of [`mse`].
pub fn mse_mean(model: &LinearModel, data: &[DataPoint]) -> Result<f64, RegressError> {
    Ok(mse(model, data)? / data.len() as f64)
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Closed-form least squares: `a = cov(x, y)/var(x)`,
/// `b = mean(y) − a*mean(x)`, the exact minimizer of the sum-form objective.
pub fn fit_ols(data: &[DataPoint]) -> Result<LinearModel, RegressError> {
    if data.len() < 2 {
        return Err(RegressError::TooFewPoints(data.len()));
    }
    let n = data.len();
    let mean_x = mean(data.iter().map(|p| p.x), n);
    let mean_y = mean(data.iter().map(|p| p.y), n);
    let mut cov = 0.0;
    let mut var = 0.0;
    for p in data {
        let dx = p.x - mean_x;
        cov += dx * (p.y - mean_y);
        var += dx * dx;
    }
    if var == 0.0 {
        return Err(RegressError::ZeroVariance);
    }
    let a = cov / var;
    Ok(LinearModel {
        a,
        b: mean_y - a * mean_x,
    })
}

/// Fits the line by full-batch gradient descent on the sum-form objective
/// with exact partial derivatives and simultaneous updates.
///
/// Internally x and y are standardized to zero mean and unit variance (raw
/// count scales make the un-conditioned iteration needlessly stiff); the
/// returned coefficients and the recorded loss history are in original
/// coordinates. A column with zero variance keeps its values centered only,
/// so the iteration stays well-defined.
///
/// Fails with [`RegressError::Diverged`] naming the epoch if the loss
/// exceeds 1e12 or stops being finite.
pub fn fit_gd(data: &[DataPoint], cfg: &GdConfig) -> Result<GdFit, RegressError> {
    if data.is_empty() {
        return Err(RegressError::EmptyData);
    }
    let n = data.len();
    let mean_x = mean(data.iter().map(|p| p.x), n);
    let mean_y = mean(data.iter().map(|p| p.y), n);
    let var_x = mean(data.iter().map(|p| (p.x - mean_x).powi(2)), n);
    let var_y = mean(data.iter().map(|p| (p.y - mean_y).powi(2)), n);
    let scale_x = if var_x > 0.0 { var_x.sqrt() } else { 1.0 };
    let scale_y = if var_y > 0.0 { var_y.sqrt() } else { 1.0 };

    let xs: Vec<f64> = data.iter().map(|p| (p.x - mean_x) / scale_x).collect();
    let ys: Vec<f64> = data.iter().map(|p| (p.y - mean_y) / scale_y).collect();

    // map the original-coordinate init into standardized space
    let mut a = cfg.init_a * scale_x / scale_y;
    let mut b = (cfg.init_a * mean_x + cfg.init_b - mean_y) / scale_y;

    let loss_scale = scale_y * scale_y;
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let record = |a: f64, b: f64, epoch: usize, history: &mut Vec<f64>| {
        let j_std: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = a * x + b - y;
                r * r
            })
            .sum();
        let j = loss_scale * j_std;
        if !j.is_finite() || j > 1e12 {
            return Err(RegressError::Diverged { epoch, loss: j });
        }
        history.push(j);
        Ok(())
    };

    record(a, b, 0, &mut history)?;
    for epoch in 1..=cfg.epochs {
        let mut grad_a = 0.0;
        let mut grad_b = 0.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            let r = a * x + b - y;
            grad_a += 2.0 * r * x;
            grad_b += 2.0 * r;
        }
        a -= cfg.learning_rate * grad_a;
        b -= cfg.learning_rate * grad_b;
        record(a, b, epoch, &mut history)?;
    }

    let slope = a * scale_y / scale_x;
    let intercept = mean_y + scale_y * b - slope * mean_x;
    Ok(GdFit {
        model: LinearModel {
            a: slope,
            b: intercept,
        },
        history,
    })
}

/// Count correction plus the per-fruit mass used to turn counts into yield.
///
/// The mean fruit weight is a user-supplied configuration value; no weight
/// data ships with the count fixtures, so no weight model can be fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldModel {
    pub count_correction: LinearModel,
    pub mean_fruit_weight: f64,
}

impl YieldModel {
    pub fn new(count_correction: LinearModel, mean_fruit_weight: f64) -> Result<Self, RegressError> {
        if !mean_fruit_weight.is_finite() || mean_fruit_weight <= 0.0 {
            return Err(RegressError::InvalidWeight(mean_fruit_weight));
        }
        Ok(Self {
            count_correction,
            mean_fruit_weight,
        })
    }
}

/// Corrected count and yield mass for one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldEstimate {
    pub corrected_count: f64,
    pub yield_mass: f64,
}

/// Applies the count correction (clamped at zero; negative fruit counts are
/// meaningless) and multiplies by the per-fruit mass.
pub fn estimate_yield(detected_count: u64, model: &YieldModel) -> YieldEstimate {
    let corrected_count = model.count_correction.predict(detected_count as f64).max(0.0);
    YieldEstimate {
        corrected_count,
        yield_mass: corrected_count * model.mean_fruit_weight,
    }
}
