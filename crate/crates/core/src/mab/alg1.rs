use rand::RngCore;

use super::{
    bias_fraction, check_alpha, check_eta, check_observation, importance_weighted_estimator,
    BanditLearner, ETA_MAX,
};
use crate::error::{Error, Result};
use crate::omd::{omd_simplex_step, RegularizerSpec, DEFAULT_TOLERANCE};
use crate::simplex::SimplexPoint;

/// Log-barrier mirror descent that predicts the last observed loss for every
/// arm and biases sampling towards the most recently played arm.
#[derive(Debug, Clone)]
pub struct Alg1State {
    /// Mirror-descent iterate `x_t`.
    pub x: SimplexPoint,
    /// Sampling distribution `w_t`.
    pub w: SimplexPoint,
    /// `c_{t−1}`, the loss observed in the previous round.
    pub last_loss_scalar: f64,
    /// `i_{t−1}`.
    pub last_arm: Option<usize>,
    pub eta: f64,
    pub alpha: f64,
    /// Bias fraction `α_t` that produced `w` from `x`.
    pub alpha_t: f64,
    reg: RegularizerSpec,
    pending: Option<usize>,
}

impl Alg1State {
    /// Uniform start with `α = 8η`; requires `η ≤ 1/162`.
    pub fn new(num_arms: usize, eta: f64) -> Result<Self> {
        Self::with_alpha(num_arms, eta, 8.0 * eta)
    }

    pub fn with_alpha(num_arms: usize, eta: f64, alpha: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Config("need at least one arm".into()));
        }
        check_eta(eta, ETA_MAX)?;
        check_alpha(alpha)?;
        let reg = RegularizerSpec::log_barrier(eta, num_arms)?;
        let u = SimplexPoint::uniform(num_arms);
        Ok(Self {
            x: u.clone(),
            w: u,
            last_loss_scalar: 0.0,
            last_arm: None,
            eta,
            alpha,
            alpha_t: 0.0,
            reg,
            pending: None,
        })
    }
}

impl BanditLearner for Alg1State {
    fn num_arms(&self) -> usize {
        self.x.len()
    }

    fn distribution(&self) -> &SimplexPoint {
        &self.w
    }

    fn iterate(&self) -> &SimplexPoint {
        &self.x
    }

    fn prediction(&self) -> Vec<f64> {
        vec![self.last_loss_scalar; self.num_arms()]
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> usize {
        let arm = self.w.sample(rng);
        self.pending = Some(arm);
        arm
    }

    fn observe(&mut self, played: usize, loss: f64) -> Result<()> {
        check_observation(self.num_arms(), &mut self.pending, played, loss)?;
        let baseline = self.prediction();
        let est = importance_weighted_estimator(loss, &baseline, self.w.as_slice(), played)?;
        let (x, _) = omd_simplex_step(&self.reg, &self.x, &est.values, DEFAULT_TOLERANCE)?;

        let alpha_next = bias_fraction(self.alpha, loss);
        let mut w = x.as_slice().iter().map(|v| (1.0 - alpha_next) * v).collect::<Vec<_>>();
        w[played] += alpha_next;
        let w = SimplexPoint::new(w)?;

        // Non-last arms lose exactly a (1 − α_{t+1}) share of their weight.
        let bound = 1.0 / (1.0 - alpha_next) * (1.0 + 1e-12);
        for i in (0..x.len()).filter(|&i| i != played) {
            let ratio = x[i] / w[i];
            if ratio > bound {
                return Err(Error::Numeric(format!(
                    "bias ratio {ratio} exceeds {bound} at arm {i}"
                )));
            }
        }

        self.x = x;
        self.w = w;
        self.alpha_t = alpha_next;
        self.last_loss_scalar = loss;
        self.last_arm = Some(played);
        Ok(())
    }
}
