//! Path-length adaptive algorithms for adversarial multi-armed and linear bandits.
//!
//! - [`omd`]: Bregman divergences and mirror-descent solves on the simplex.
//! - [`mab`]: the bias-towards-last-arm learner, the minority/majority hybrid
//!   learner, the last-observed-loss optimistic baseline and Exp3.
//! - [`linear`]: optimistic SCRiBLe on the unit ball with projected-gradient
//!   and greedy-projection predictions.
//! - [`adversary`]: loss streams, including the adaptive lower-bound adversary.
//! - [`harness`]: seeded simulations, regret and path-length metrics, sweeps
//!   and CSV/JSON output.

pub mod adversary;
pub mod error;
pub mod harness;
pub mod linear;
pub mod mab;
pub mod omd;
pub mod simplex;

pub use error::{Error, Result};
pub use omd::{
    bregman_divergence, grad_inverse_coordinate, omd_simplex_step, RegularizerKind,
    RegularizerSpec, SolveReport,
};
pub use adversary::{path_lengths, LossStream, PathLengths};
pub use harness::{ExperimentConfig, RunRecord};
pub use linear::{BallBarrier, PredictionStrategy, ScribbleState};
pub use mab::BanditLearner;
pub use simplex::{sample_arm, SimplexPoint};
