use crate::error::{Error, Result};

/// Importance-weighted loss estimate with a per-arm baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorVector {
    pub values: Vec<f64>,
}

/// `valuesᵢ = baselineᵢ` except at the played arm, where the innovation
/// `observed − baseline_played` is divided by `w_played`.
pub fn importance_weighted_estimator(
    observed_loss: f64,
    baseline: &[f64],
    w: &[f64],
    played: usize,
) -> Result<EstimatorVector> {
    if baseline.len() != w.len() || played >= w.len() {
        return Err(Error::Domain(format!(
            "estimator inputs disagree: baseline {}, w {}, played {played}",
            baseline.len(),
            w.len()
        )));
    }
    let p = w[played];
    if !(p > 0.0) {
        return Err(Error::Domain(format!(
            "sampling probability of played arm {played} is {p}"
        )));
    }
    let mut values = baseline.to_vec();
    values[played] = (observed_loss - baseline[played]) / p + baseline[played];
    Ok(EstimatorVector { values })
}

/// Exact expectation `Σᵢ wᵢ · estimator(lossᵢ, baseline, w, i)` over the K draws.
pub fn estimator_expectation(loss: &[f64], baseline: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let mut mean = vec![0.0; w.len()];
    for (i, &wi) in w.iter().enumerate() {
        let est = importance_weighted_estimator(loss[i], baseline, w, i)?;
        for (m, v) in mean.iter_mut().zip(&est.values) {
            *m += wi * v;
        }
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_formula() {
        let e = importance_weighted_estimator(0.8, &[0.6, 0.6], &[0.5, 0.5], 0).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert_eq!(e.values[1], 0.6);
    }

    #[test]
    fn zero_innovation_returns_baseline() {
        let b = [0.3, 0.7, 0.1];
        let e = importance_weighted_estimator(0.7, &b, &[0.2, 0.3, 0.5], 1).unwrap();
        assert_eq!(e.values, b);
    }

    #[test]
    fn zero_probability_is_rejected() {
        assert!(matches!(
            importance_weighted_estimator(0.5, &[0.0, 0.0], &[1.0, 0.0], 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn expectation_recovers_loss() {
        let loss = [0.9, 0.1, 0.4];
        let mean = estimator_expectation(&loss, &[0.5, 0.2, 0.0], &[0.1, 0.3, 0.6]).unwrap();
        for (m, l) in mean.iter().zip(loss) {
            assert!((m - l).abs() <= 1e-12);
        }
    }
}
