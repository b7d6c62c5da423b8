//! Temperature softmax and the stable scalar pieces shared by the losses.

use super::DistillError;

/// Temperature softmax `q_i = exp(z_i/T) / Σ_j exp(z_j/T)`.
///
/// Computed with max-subtraction, so arbitrarily large logits do not
/// overflow. Output entries are positive and sum to 1 within 1e-12.
pub fn temperature_softmax(logits: &[f64], temperature: f64) -> Result<Vec<f64>, DistillError> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(DistillError::InvalidTemperature(temperature));
    }
    if logits.is_empty() {
        return Err(DistillError::EmptyLogits);
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(DistillError::NonFiniteLogits);
    }
    let scaled: Vec<f64> = logits.iter().map(|z| z / temperature).collect();
    Ok(softmax_unchecked(&scaled))
}

/// Plain softmax on pre-validated finite logits.
pub(crate) fn softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Log-softmax via the shifted log-sum-exp.
pub(crate) fn log_softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|z| z - log_sum).collect()
}

/// Shannon entropy of a probability vector, in nats.
pub fn entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(logit)` against a target probability,
/// in the overflow-safe logit form.
pub(crate) fn bce_with_logits(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p()
}

/// KL divergence between the temperature-softened class distributions of two
/// logit vectors, `KL(softmax_T(teacher) || softmax_T(student))`.
///
/// Exactly zero when the logit vectors are identical.
pub(crate) fn softened_class_kl(teacher: &[f64], student: &[f64], temperature: f64) -> f64 {
    let ts: Vec<f64> = teacher.iter().map(|z| z / temperature).collect();
    let ss: Vec<f64> = student.iter().map(|z| z / temperature).collect();
    let lp = log_softmax_unchecked(&ts);
    let lq = log_softmax_unchecked(&ss);
    lp.iter()
        .zip(&lq)
        .map(|(&lpi, &lqi)| lpi.exp() * (lpi - lqi))
        .sum()
}

/// KL divergence between the Bernoulli heads `sigmoid(teacher_logit)` and
/// `sigmoid(student_logit)`.
///
/// This is binary cross-entropy against the teacher probability net of the
/// teacher entropy, so it is non-negative, vanishes exactly when the logits
/// agree, and has the same student gradient as the plain cross-entropy.
pub(crate) fn bernoulli_kl(teacher_logit: f64, student_logit: f64) -> f64 {
    let target = sigmoid(teacher_logit);
    bce_with_logits(student_logit, target) - bce_with_logits(teacher_logit, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_logits_split_evenly() {
        let q = temperature_softmax(&[0.0, 0.0], 3.7).unwrap();
        assert_relative_eq!(q[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(q[1], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn halved_logits_match_hand_arithmetic() {
        // softmax_2((2, 0)) = softmax((1, 0)) = (e/(e+1), 1/(e+1))
        let q = temperature_softmax(&[2.0, 0.0], 2.0).unwrap();
        let e = std::f64::consts::E;
        assert_relative_eq!(q[0], e / (e + 1.0), max_relative = 1e-14);
        assert_relative_eq!(q[1], 1.0 / (e + 1.0), max_relative = 1e-14);
    }

    #[test]
    fn high_temperature_approaches_uniform() {
        // deviation from uniform shrinks like |z - mean(z)| / (k * T)
        let q = temperature_softmax(&[5.0, 1.0, -3.0], 1000.0).unwrap();
        for &p in &q {
            assert!((p - 1.0 / 3.0).abs() < 2e-3);
        }
        let q = temperature_softmax(&[5.0, 1.0, -3.0], 10_000.0).unwrap();
        for &p in &q {
            assert!((p - 1.0 / 3.0).abs() < 2e-4);
        }
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let q = temperature_softmax(&[1000.0, 999.0], 1.0).unwrap();
        assert!(q.iter().all(|p| p.is_finite() && *p > 0.0));
        assert_relative_eq!(q.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn invalid_inputs_error() {
        assert_eq!(
            temperature_softmax(&[1.0], 0.0),
            Err(DistillError::InvalidTemperature(0.0))
        );
        assert_eq!(
            temperature_softmax(&[1.0], -2.0),
            Err(DistillError::InvalidTemperature(-2.0))
        );
        assert_eq!(temperature_softmax(&[], 1.0), Err(DistillError::EmptyLogits));
        assert_eq!(
            temperature_softmax(&[f64::NAN], 1.0),
            Err(DistillError::NonFiniteLogits)
        );
    }

    #[test]
    fn class_kl_matches_direct_summation() {
        // teacher (1, 0), student (0, 1), T = 1: both softmaxes are the same
        // Bernoulli flipped, KL = (e-1)/(e+1) by direct computation.
        let kl = softened_class_kl(&[1.0, 0.0], &[0.0, 1.0], 1.0);
        let e = std::f64::consts::E;
        assert_relative_eq!(kl, (e - 1.0) / (e + 1.0), max_relative = 1e-13);

        // independent direct-summation oracle on an asymmetric case
        let teacher = [0.3, -1.2, 2.0];
        let student = [1.1, 0.4, -0.5];
        let t = 3.0;
        let p = temperature_softmax(&teacher, t).unwrap();
        let q = temperature_softmax(&student, t).unwrap();
        let direct: f64 = p
            .iter()
            .zip(&q)
            .map(|(&pi, &qi)| pi * (pi / qi).ln())
            .sum();
        assert_relative_eq!(
            softened_class_kl(&teacher, &student, t),
            direct,
            max_relative = 1e-12
        );
    }

    #[test]
    fn class_kl_zero_at_equality() {
        let z = [0.7, -0.3, 1.9];
        assert_eq!(softened_class_kl(&z, &z, 20.0), 0.0);
    }

    #[test]
    fn bernoulli_kl_zero_at_equality_and_positive_otherwise() {
        assert_eq!(bernoulli_kl(0.35, 0.35), 0.0);
        assert!(bernoulli_kl(0.35, -0.8) > 0.0);
        assert!(bernoulli_kl(-2.0, 2.0) > 0.0);
    }

    #[test]
    fn bce_with_logits_matches_naive_form() {
        for &(x, y) in &[(0.0, 1.0), (1.5, 0.25), (-3.0, 0.9)] {
            let p = sigmoid(x);
            let naive = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            assert_relative_eq!(bce_with_logits(x, y), naive, max_relative = 1e-12);
        }
        assert_relative_eq!(
            bce_with_logits(0.0, 1.0),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn entropy_of_uniform() {
        assert_relative_eq!(
            entropy(&[0.5, 0.5]),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
    }
}
