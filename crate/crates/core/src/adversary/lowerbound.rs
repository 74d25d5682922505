use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{stream_rng, LossStream, StreamKind};
use crate::error::{Error, Result};

/// Adaptive Bernoulli adversary: one hidden good arm with a shifted mean,
/// each arm's loss redrawn only after that arm is played, zeros past `Tγ`.
#[derive(Debug, Clone)]
pub struct AdaptiveLowerBound {
    num_arms: usize,
    horizon: usize,
    gamma: f64,
    good_arm: usize,
    good_mean: f64,
    current: Vec<f64>,
    rng: ChaCha8Rng,
}

impl AdaptiveLowerBound {
    pub fn new(num_arms: usize, horizon: usize, gamma: f64, seed: u64) -> Result<Self> {
        if num_arms == 0 || horizon == 0 {
            return Err(Error::Config("lower-bound stream needs arms and rounds".into()));
        }
        let lo = num_arms as f64 / horizon as f64;
        if !(gamma >= lo && gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {gamma} must lie in [{lo}, 1]")));
        }
        let mut rng = stream_rng(seed);
        let good_arm = rng.random_range(0..num_arms);
        let mut good_mean = 0.5 - 0.25 * (num_arms as f64 / (horizon as f64 * gamma)).sqrt();
        if good_mean < 0.0 {
            log::warn!("good-arm mean {good_mean} clamped to 0");
            good_mean = 0.0;
        }
        Ok(Self {
            num_arms,
            horizon,
            gamma,
            good_arm,
            good_mean,
            current: vec![0.0; num_arms],
            rng,
        })
    }

    pub fn good_arm(&self) -> usize {
        self.good_arm
    }

    pub fn good_mean(&self) -> f64 {
        self.good_mean
    }

    fn draw(&mut self, arm: usize) -> f64 {
        let p = if arm == self.good_arm { self.good_mean } else { 0.5 };
        if self.rng.random_bool(p) {
            1.0
        } else {
            0.0
        }
    }
}

impl LossStream<usize> for AdaptiveLowerBound {
    fn kind(&self) -> StreamKind {
        StreamKind::Adaptive
    }

    fn dim(&self) -> usize {
        self.num_arms
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn next(&mut self, t: usize, history: &[usize]) -> Result<Vec<f64>> {
        if t == 0 || t > self.horizon {
            return Err(Error::Domain(format!("round {t} outside 1..={}", self.horizon)));
        }
        if t as f64 > self.horizon as f64 * self.gamma {
            return Ok(vec![0.0; self.num_arms]);
        }
        if t == 1 {
            for i in 0..self.num_arms {
                self.current[i] = self.draw(i);
            }
        } else {
            let prev = *history.get(t - 2).ok_or_else(|| {
                Error::Domain(format!("adaptive stream needs the action of round {}", t - 1))
            })?;
            if prev >= self.num_arms {
                return Err(Error::Domain(format!("history holds invalid arm {prev}")));
            }
            self.current[prev] = self.draw(prev);
        }
        Ok(self.current.clone())
    }
}
