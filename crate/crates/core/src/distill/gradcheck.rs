//! Central finite-difference validation of analytic gradients.

use super::DistillError;

/// Checks an analytic gradient against central finite differences of
/// `loss_at` around `params`.
///
/// Returns the maximum over coordinates of
/// `|analytic - numeric| / max(1e-8, |analytic| + |numeric|)`.
pub fn gradcheck<F>(
    loss_at: F,
    params: &[f64],
    analytic: &[f64],
    epsilon: f64,
) -> Result<f64, DistillError>
where
    F: Fn(&[f64]) -> f64,
{
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(DistillError::InvalidEpsilon(epsilon));
    }
    if params.len() != analytic.len() {
        return Err(DistillError::ShapeMismatch(format!(
            "{} parameters but {} gradient entries",
            params.len(),
            analytic.len()
        )));
    }
    let mut work = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        work[i] = params[i] + epsilon;
        let plus = loss_at(&work);
        work[i] = params[i] - epsilon;
        let minus = loss_at(&work);
        work[i] = params[i];
        let numeric = (plus - minus) / (2.0 * epsilon);
        let scale = (analytic[i].abs() + numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_loss_gradient() {
        let loss = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>();
        let params = [1.0, 2.0];
        let analytic = [2.0, 4.0];
        let err = gradcheck(loss, &params, &analytic, 1e-5).unwrap();
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn constant_loss_has_zero_gradient() {
        let loss = |_: &[f64]| 3.25;
        let err = gradcheck(loss, &[0.4, -0.8, 2.0], &[0.0, 0.0, 0.0], 1e-5).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let loss = |p: &[f64]| p[0] * p[0];
        let err = gradcheck(loss, &[1.0], &[5.0], 1e-5).unwrap();
        assert!(err > 0.1);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let loss = |_: &[f64]| 0.0;
        assert_eq!(
            gradcheck(loss, &[1.0], &[0.0], 0.0),
            Err(DistillError::InvalidEpsilon(0.0))
        );
        assert!(gradcheck(loss, &[1.0], &[0.0], -1e-3).is_err());
    }

    #[test]
    fn softened_kl_pipeline_gradient() {
        // loss(z) = T^2 * KL(p || softmax_T(z)) for a fixed teacher
        // distribution p; the analytic gradient is T * (softmax_T(z) - p).
        let temperature = 4.0;
        let teacher = [1.2, -0.4, 0.7];
        let p = crate::distill::temperature_softmax(&teacher, temperature).unwrap();
        let loss = |z: &[f64]| {
            let q = crate::distill::temperature_softmax(z, temperature).unwrap();
            temperature
                * temperature
                * p.iter()
                    .zip(&q)
                    .map(|(&pi, &qi)| pi * (pi / qi).ln())
                    .sum::<f64>()
        };
        let z = [0.3, 0.9, -1.1];
        let q = crate::distill::temperature_softmax(&z, temperature).unwrap();
        let analytic: Vec<f64> = q
            .iter()
            .zip(&p)
            .map(|(&qi, &pi)| temperature * (qi - pi))
            .collect();
        let err = gradcheck(loss, &z, &analytic, 1e-5).unwrap();
        assert!(err < 1e-4, "relative error {err}");
    }
}
