use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::barrier::{dikin_sample, Barrier, BallBarrier, DikinSample};
use super::predict::{predict_option1, predict_option2};
use super::{dot, norm};
use crate::error::{Error, Result};

/// Stationarity tolerance of the mirror steps.
pub const STEP_TOLERANCE: f64 = 1e-10;

/// How the prediction `m_{t+1}` is formed from the round's feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionStrategy {
    /// Projected gradient step on the squared prediction error.
    OptionI,
    /// Greedy projection onto the slice consistent with the feedback.
    #[serde(rename = "option_ii")]
    OptionII,
    /// `m_t = 0` throughout, which disables optimism.
    Frozen,
}

/// `d (c − ⟨w, m⟩) σ √λ v + m`.
pub fn linear_estimator(
    c: f64,
    w: &[f64],
    m: &[f64],
    lambda: f64,
    v: &[f64],
    sigma: f64,
    d: usize,
) -> Vec<f64> {
    let coef = d as f64 * (c - dot(w, m)) * sigma * lambda.sqrt();
    v.iter().zip(m).map(|(vi, mi)| coef * vi + mi).collect()
}

/// `argmin_x η⟨x, g⟩ + D_ψ(x, anchor)` for the ball barrier.
pub fn scribble_step(b: &BallBarrier, anchor: &[f64], g: &[f64], eta: f64, tol: f64) -> Result<Vec<f64>> {
    b.mirror_step(anchor, g, eta, tol)
}

/// Per-round trace of the linear learner.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRound {
    /// Action `w_t`.
    pub w: Vec<f64>,
    /// Observed `c_t = ⟨w_t, ℓ_t⟩`.
    pub c: f64,
    /// Prediction `m_t` used this round.
    pub m: Vec<f64>,
    /// Iterate `x_t`.
    pub x: Vec<f64>,
    /// `⟨w_t, ℓ_t − m_t⟩²`.
    pub variance: f64,
}

/// Interior iterates, prediction and the most recent Dikin draw.
#[derive(Debug, Clone)]
pub struct ScribbleState {
    pub barrier: BallBarrier,
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub m: Vec<f64>,
    pub eta: f64,
    pub last_sample: Option<(DikinSample, f64)>,
}

impl ScribbleState {
    /// Starts at the barrier minimizer (the origin) with `m_1 = 0`.
    pub fn new(dimension: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("learning rate {eta} must be positive")));
        }
        Ok(Self {
            barrier: BallBarrier::new(dimension)?,
            x: vec![0.0; dimension],
            x_prime: vec![0.0; dimension],
            m: vec![0.0; dimension],
            eta,
            last_sample: None,
        })
    }

    /// `√(ν ln T / (d² V̂))` for a path-length estimate `V̂`.
    pub fn default_eta(dimension: usize, horizon: usize, path_length: f64) -> f64 {
        let d = dimension as f64;
        let t = (horizon.max(2) as f64).ln();
        (t / (d * d * path_length.max(f64::MIN_POSITIVE))).sqrt()
    }
}

/// Plays one round against the loss vector `loss` chosen by the adversary.
pub fn scribble_round(
    state: &mut ScribbleState,
    strategy: PredictionStrategy,
    rng: &mut dyn RngCore,
    loss: &[f64],
) -> Result<LinearRound> {
    let d = state.barrier.dimension;
    if loss.len() != d {
        return Err(Error::Domain(format!("loss has dimension {}, expected {d}", loss.len())));
    }
    let sample = dikin_sample(&state.barrier, &state.x, rng)?;
    let wn = norm(&sample.w);
    if !(wn > 0.0 && wn <= 1.0 + 1e-12) {
        return Err(Error::Numeric(format!("action norm {wn} leaves the unit ball")));
    }
    let c = dot(&sample.w, loss);
    let est = linear_estimator(c, &sample.w, &state.m, sample.lambda, &sample.v, sample.sigma, d);
    let m_next = match strategy {
        PredictionStrategy::OptionI => predict_option1(&state.m, &sample.w, c),
        PredictionStrategy::OptionII => predict_option2(&state.m, &sample.w, c)?,
        PredictionStrategy::Frozen => vec![0.0; d],
    };
    let x_prime = scribble_step(&state.barrier, &state.x_prime, &est, state.eta, STEP_TOLERANCE)?;
    let x = scribble_step(&state.barrier, &x_prime, &m_next, state.eta, STEP_TOLERANCE)?;

    let gap: Vec<f64> = loss.iter().zip(&state.m).map(|(l, m)| l - m).collect();
    let row = LinearRound {
        w: sample.w.clone(),
        c,
        m: std::mem::replace(&mut state.m, m_next),
        x: std::mem::replace(&mut state.x, x),
        variance: dot(&sample.w, &gap).powi(2),
    };
    state.x_prime = x_prime;
    state.last_sample = Some((sample, c));
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::barrier::dikin_endpoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_innovation_returns_prediction() {
        let w = [0.3, -0.1];
        let m = [0.2, 0.5];
        let out = linear_estimator(dot(&w, &m), &w, &m, 3.0, &[1.0, 0.0], 1.0, 2);
        assert_eq!(out, m.to_vec());
    }

    #[test]
    fn hand_evaluated_estimator() {
        let b = BallBarrier::new(2).unwrap();
        let pairs = b.eigen(&[0.0, 0.0]).unwrap();
        let s = dikin_endpoint(&[0.0, 0.0], &pairs[0], 0, 1.0);
        assert!((s.w[0] - 0.5f64.sqrt()).abs() < 1e-15 && s.w[1] == 0.0);
        let c = dot(&s.w, &[1.0, 0.0]);
        let est = linear_estimator(c, &s.w, &[0.0, 0.0], s.lambda, &s.v, s.sigma, 2);
        assert!((est[0] - 2.0).abs() < 1e-15);
        assert_eq!(est[1], 0.0);
    }

    #[test]
    fn zero_gradient_step_returns_anchor() {
        let b = BallBarrier::new(3).unwrap();
        let a = [0.2, -0.3, 0.1];
        assert_eq!(scribble_step(&b, &a, &[0.0; 3], 0.5, 1e-10).unwrap(), a.to_vec());
    }

    #[test]
    fn zero_stream_keeps_option1_prediction_at_zero() {
        let mut s = ScribbleState::new(3, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let row = scribble_round(&mut s, PredictionStrategy::OptionI, &mut rng, &[0.0; 3]).unwrap();
            assert_eq!(row.c, 0.0);
            assert_eq!(s.m, vec![0.0; 3]);
        }
    }

    #[test]
    fn option2_variance_equals_prediction_move() {
        let mut s = ScribbleState::new(3, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let loss = [0.5, -0.4, 0.3];
        let mut total = 0.0;
        for _ in 0..500 {
            let row = scribble_round(&mut s, PredictionStrategy::OptionII, &mut rng, &loss).unwrap();
            let moved: Vec<f64> = s.m.iter().zip(&row.m).map(|(a, b)| a - b).collect();
            assert!((row.variance - dot(&row.w, &moved).powi(2)).abs() <= 1e-12);
            assert!(norm(&s.m) <= 1.0 + 1e-12);
            total += row.variance;
        }
        assert!(total <= 4.0);
    }

    #[test]
    fn iterates_stay_interior() {
        let mut s = ScribbleState::new(4, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let loss: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
            scribble_round(&mut s, PredictionStrategy::OptionI, &mut rng, &loss).unwrap();
            assert!(norm(&s.x) < 1.0 && norm(&s.x_prime) < 1.0);
        }
    }
}
