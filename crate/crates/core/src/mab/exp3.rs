use rand::RngCore;

use super::{check_observation, BanditLearner};
use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Exponential weights on importance-weighted losses.
#[derive(Debug, Clone)]
pub struct Exp3State {
    /// Log-weights, shifted so the largest is zero.
    pub log_weights: Vec<f64>,
    pub p: SimplexPoint,
    pub lr: f64,
    pending: Option<usize>,
}

impl Exp3State {
    pub fn new(num_arms: usize, lr: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Config("need at least one arm".into()));
        }
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("Exp3 learning rate {lr} must be positive")));
        }
        Ok(Self {
            log_weights: vec![0.0; num_arms],
            p: SimplexPoint::uniform(num_arms),
            lr,
            pending: None,
        })
    }

    /// `√(ln K / (T K))`.
    pub fn default_lr(num_arms: usize, horizon: usize) -> f64 {
        let k = num_arms.max(2) as f64;
        (k.ln() / (horizon.max(1) as f64 * k)).sqrt()
    }

    fn refresh(&mut self) -> Result<()> {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in &mut self.log_weights {
            *v -= top;
        }
        let raw: Vec<f64> = self
            .log_weights
            .iter()
            .map(|v| v.exp().max(f64::MIN_POSITIVE))
            .collect();
        let total: f64 = raw.iter().sum();
        self.p = SimplexPoint::new(raw.iter().map(|v| v / total).collect())?;
        Ok(())
    }
}

impl BanditLearner for Exp3State {
    fn num_arms(&self) -> usize {
        self.log_weights.len()
    }

    fn distribution(&self) -> &SimplexPoint {
        &self.p
    }

    fn iterate(&self) -> &SimplexPoint {
        &self.p
    }

    fn prediction(&self) -> Vec<f64> {
        vec![0.0; self.num_arms()]
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> usize {
        let arm = self.p.sample(rng);
        self.pending = Some(arm);
        arm
    }

    fn observe(&mut self, played: usize, loss: f64) -> Result<()> {
        check_observation(self.num_arms(), &mut self.pending, played, loss)?;
        let est = loss / self.p[played];
        if !est.is_finite() {
            return Err(Error::Numeric(format!("Exp3 estimate overflowed at arm {played}")));
        }
        self.log_weights[played] -= self.lr * est;
        self.refresh()
    }
}
