//! Loss streams for the bandit simulations and path-length measurement.

mod lowerbound;
mod oblivious;

pub use lowerbound::AdaptiveLowerBound;
pub use oblivious::{ConstantStream, IidUniform, LinearDrift, Piecewise};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Whether a stream may react to the learner's past actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Oblivious,
    Adaptive,
}

/// Generator of loss vectors `ℓ_t`.
///
/// `A` is the learner's action type: an arm index for bandits, a point for
/// linear bandits. `history` holds the actions of rounds `1..t`.
pub trait LossStream<A>: Send {
    fn kind(&self) -> StreamKind;

    /// Length of each loss vector.
    fn dim(&self) -> usize;

    fn horizon(&self) -> usize;

    /// Loss of round `t` (1-based).
    fn next(&mut self, t: usize, history: &[A]) -> Result<Vec<f64>>;
}

/// Cumulative variation `Σ_t ‖ℓ_t − ℓ_{t−1}‖_p` with `ℓ_0 = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PathLengths {
    pub v1: f64,
    pub v2: f64,
    pub vinf: f64,
}

impl PathLengths {
    /// Adds the jump from `prev` to `next`; `prev = None` means the zero vector.
    pub fn push(&mut self, prev: Option<&[f64]>, next: &[f64]) {
        let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
        for (i, &v) in next.iter().enumerate() {
            let d = (v - prev.map_or(0.0, |p| p[i])).abs();
            l1 += d;
            l2 += d * d;
            linf = linf.max(d);
        }
        self.v1 += l1;
        self.v2 += l2.sqrt();
        self.vinf += linf;
    }
}

pub fn path_lengths<V: AsRef<[f64]>>(seq: &[V]) -> PathLengths {
    let mut out = PathLengths::default();
    let mut prev: Option<&[f64]> = None;
    for l in seq {
        out.push(prev, l.as_ref());
        prev = Some(l.as_ref());
    }
    out
}

/// Adversary randomness: stream 0 of the seed, disjoint from the learner's.
pub(crate) fn stream_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}
