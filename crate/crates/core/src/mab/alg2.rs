use rand::RngCore;

use super::{
    bias_fraction, check_alpha, check_eta, check_observation, importance_weighted_estimator,
    max_ratio, BanditLearner, ETA_MAX,
};
use crate::error::{Error, Result};
use crate::omd::{omd_simplex_step, RegularizerSpec, DEFAULT_TOLERANCE};
use crate::simplex::SimplexPoint;

/// Bound on consecutive iterate ratios enforced every round.
pub const STABILITY_BOUND: f64 = 2.0;

/// Hybrid-regularized optimistic mirror descent with minority and majority
/// groups split at weight `β`.
#[derive(Debug, Clone)]
pub struct Alg2State {
    /// `x'_t`, the anchor of the estimator step.
    pub x_prime: SimplexPoint,
    /// `x_t`.
    pub x: SimplexPoint,
    /// `w_t`.
    pub w: SimplexPoint,
    /// Prediction `m_t`.
    pub m: Vec<f64>,
    /// `S_{t−1}`, sorted.
    pub minority: Vec<usize>,
    /// `i_{τ(t−1)}`; `None` before the first round.
    pub tau_arm: Option<usize>,
    /// `c_{τ(t−1)}`; zero before the first round.
    pub tau_loss: f64,
    /// Most recent loss of each arm, zero if never played.
    pub last_observed: Vec<f64>,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    reg: RegularizerSpec,
    pending: Option<usize>,
}

impl Alg2State {
    /// Requires `η ≤ min{1/K, 1/162}` and `β ∈ [0, 1)`; `α = 8η`.
    pub fn new(num_arms: usize, eta: f64, beta: f64) -> Result<Self> {
        Self::with_alpha(num_arms, eta, beta, 8.0 * eta)
    }

    pub fn with_alpha(num_arms: usize, eta: f64, beta: f64, alpha: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Config("need at least one arm".into()));
        }
        check_eta(eta, ETA_MAX.min(1.0 / num_arms as f64))?;
        check_alpha(alpha)?;
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Config(format!("beta {beta} must lie in [0, 1)")));
        }
        let reg = RegularizerSpec::hybrid(eta, num_arms)?;
        let u = SimplexPoint::uniform(num_arms);
        Ok(Self {
            x_prime: u.clone(),
            x: u.clone(),
            w: u,
            m: vec![0.0; num_arms],
            minority: (0..num_arms).collect(),
            tau_arm: None,
            tau_loss: 0.0,
            last_observed: vec![0.0; num_arms],
            eta,
            alpha,
            beta,
            reg,
            pending: None,
        })
    }
}

impl BanditLearner for Alg2State {
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
        self.m.clone()
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> usize {
        let arm = self.w.sample(rng);
        self.pending = Some(arm);
        arm
    }

    fn observe(&mut self, played: usize, loss: f64) -> Result<()> {
        let k = self.num_arms();
        check_observation(k, &mut self.pending, played, loss)?;

        let (tau_arm, tau_loss) = if self.minority.binary_search(&played).is_ok() {
            (Some(played), loss)
        } else {
            (self.tau_arm, self.tau_loss)
        };
        let minority: Vec<usize> = (0..k).filter(|&i| self.x[i] < self.beta).collect();

        let est = importance_weighted_estimator(loss, &self.m, self.w.as_slice(), played)?;
        let mut last_observed = self.last_observed.clone();
        last_observed[played] = loss;
        let mut m_next = last_observed.clone();
        for &i in &minority {
            m_next[i] = tau_loss;
        }

        let (x_prime, _) = omd_simplex_step(&self.reg, &self.x_prime, &est.values, DEFAULT_TOLERANCE)?;
        let (x, _) = omd_simplex_step(&self.reg, &x_prime, &m_next, DEFAULT_TOLERANCE)?;

        let (arm, ratio) = max_ratio(x.as_slice(), self.x.as_slice());
        if ratio > STABILITY_BOUND {
            return Err(Error::Stability { arm, ratio });
        }

        let w = match tau_arm {
            Some(target) => {
                let frac = bias_fraction(self.alpha, tau_loss);
                let mut w = x.as_slice().to_vec();
                let mut moved = 0.0;
                for &j in minority.iter().filter(|&&j| j != target) {
                    moved += frac * w[j];
                    w[j] *= 1.0 - frac;
                }
                w[target] += moved;
                SimplexPoint::new(w)?
            }
            None => x.clone(),
        };

        self.x_prime = x_prime;
        self.x = x;
        self.w = w;
        self.m = m_next;
        self.minority = minority;
        self.tau_arm = tau_arm;
        self.tau_loss = tau_loss;
        self.last_observed = last_observed;
        Ok(())
    }
}
