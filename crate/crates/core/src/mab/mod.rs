//! Stateful multi-armed bandit learners with an act/observe protocol.
//!
//! A round is `act` (draw an arm from the sampling distribution) followed by
//! `observe` (feed back the loss of that arm). Adversaries only see past plays.

mod alg1;
mod alg2;
mod estimator;
mod exp3;
mod weiluo;

pub use alg1::Alg1State;
pub use alg2::Alg2State;
pub use estimator::{estimator_expectation, importance_weighted_estimator, EstimatorVector};
pub use exp3::Exp3State;
pub use weiluo::WeiLuoState;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Largest learning rate admitted by the bias and stability arguments.
pub const ETA_MAX: f64 = 1.0 / 162.0;

/// Common interface of the bandit learners driven by the harness.
pub trait BanditLearner: Send {
    fn num_arms(&self) -> usize;

    /// Sampling distribution `w_t` of the coming round.
    fn distribution(&self) -> &SimplexPoint;

    /// Mirror-descent iterate `x_t` (equal to `w_t` for learners without a bias step).
    fn iterate(&self) -> &SimplexPoint;

    /// Optimistic prediction `m_t` used as the estimator baseline this round.
    fn prediction(&self) -> Vec<f64>;

    /// Draws `i_t ~ w_t` and remembers the draw for the following `observe`.
    fn act(&mut self, rng: &mut dyn RngCore) -> usize;

    /// Feeds back `c_t = ℓ_{t, played}` and advances to round `t + 1`.
    fn observe(&mut self, played: usize, loss: f64) -> Result<()>;
}

/// Validates an observation against the pending draw and the loss range.
fn check_observation(
    num_arms: usize,
    pending: &mut Option<usize>,
    played: usize,
    loss: f64,
) -> Result<()> {
    if played >= num_arms {
        return Err(Error::Domain(format!(
            "arm {played} out of range for {num_arms} arms"
        )));
    }
    if let Some(drawn) = pending.take() {
        if drawn != played {
            return Err(Error::Domain(format!(
                "observed arm {played} but arm {drawn} was drawn"
            )));
        }
    }
    if !(0.0..=1.0).contains(&loss) {
        return Err(Error::Domain(format!("loss {loss} outside [0, 1]")));
    }
    Ok(())
}

fn check_eta(eta: f64, max: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= max) {
        return Err(Error::Config(format!(
            "learning rate {eta} must lie in (0, {max}]"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// `α(1 − c) / (1 + α(1 − c))`.
pub fn bias_fraction(alpha: f64, c: f64) -> f64 {
    let a = alpha * (1.0 - c);
    a / (1.0 + a)
}

/// Largest of `max(a_i/b_i, b_i/a_i)` over coordinates, and its arm.
pub fn max_ratio(a: &[f64], b: &[f64]) -> (usize, f64) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / y).max(y / x))
        .enumerate()
        .fold((0, 1.0), |best, (i, r)| if r > best.1 { (i, r) } else { best })
}
