use rand::RngCore;

use super::{check_eta, check_observation, importance_weighted_estimator, BanditLearner};
use crate::error::{Error, Result};
use crate::omd::{omd_simplex_step, RegularizerKind, RegularizerSpec, DEFAULT_TOLERANCE};
use crate::simplex::SimplexPoint;

/// Optimistic log-barrier mirror descent predicting each arm's most recently
/// observed loss and sampling directly from `x_t`.
#[derive(Debug, Clone)]
pub struct WeiLuoState {
    pub x_prime: SimplexPoint,
    pub x: SimplexPoint,
    /// Prediction `m_t`: last observed loss per arm, zero if never played.
    pub m: Vec<f64>,
    pub eta: f64,
    reg: RegularizerSpec,
    pending: Option<usize>,
}

impl WeiLuoState {
    pub fn new(num_arms: usize, eta: f64) -> Result<Self> {
        Self::with_regularizer(num_arms, eta, RegularizerKind::LogBarrier)
    }

    /// Same learner under a different regularizer, for comparisons against
    /// hybrid-regularized variants.
    pub fn with_regularizer(num_arms: usize, eta: f64, kind: RegularizerKind) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Config("need at least one arm".into()));
        }
        check_eta(eta, f64::INFINITY)?;
        let reg = RegularizerSpec::new(kind, eta, num_arms)?;
        let u = SimplexPoint::uniform(num_arms);
        Ok(Self {
            x_prime: u.clone(),
            x: u,
            m: vec![0.0; num_arms],
            eta,
            reg,
            pending: None,
        })
    }
}

impl BanditLearner for WeiLuoState {
    fn num_arms(&self) -> usize {
        self.x.len()
    }

    fn distribution(&self) -> &SimplexPoint {
        &self.x
    }

    fn iterate(&self) -> &SimplexPoint {
        &self.x
    }

    fn prediction(&self) -> Vec<f64> {
        self.m.clone()
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> usize {
        let arm = self.x.sample(rng);
        self.pending = Some(arm);
        arm
    }

    fn observe(&mut self, played: usize, loss: f64) -> Result<()> {
        check_observation(self.num_arms(), &mut self.pending, played, loss)?;
        let est = importance_weighted_estimator(loss, &self.m, self.x.as_slice(), played)?;
        let mut m = self.m.clone();
        m[played] = loss;
        let (x_prime, _) = omd_simplex_step(&self.reg, &self.x_prime, &est.values, DEFAULT_TOLERANCE)?;
        let (x, _) = omd_simplex_step(&self.reg, &x_prime, &m, DEFAULT_TOLERANCE)?;
        self.x_prime = x_prime;
        self.x = x;
        self.m = m;
        Ok(())
    }
}
