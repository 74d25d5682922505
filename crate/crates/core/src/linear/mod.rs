//! Optimistic SCRiBLe on the unit 2-norm ball.

mod barrier;
mod predict;
mod scribble;

pub use barrier::{
    barrier_eval, dikin_endpoint, dikin_sample, Barrier, BallBarrier, DikinSample, Eigenpair,
};
pub use predict::{chase_greedy, predict_option1, predict_option2, project_ball, Slice};
pub use scribble::{
    linear_estimator, scribble_round, scribble_step, LinearRound, PredictionStrategy,
    ScribbleState,
};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
