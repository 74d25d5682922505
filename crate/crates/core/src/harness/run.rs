use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::{commit_tag, learner_rng};
use crate::adversary::PathLengths;
use crate::error::{Error, Result};
use crate::linear::scribble_round;

/// Action of one round: an arm, or a point of the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    Arm(usize),
    Point(Vec<f64>),
}

/// Per-round trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: usize,
    pub action: Action,
    /// Observed scalar loss `c_t`.
    pub loss: f64,
    /// `⟨w_t, ℓ_t⟩` for bandits, `⟨x_t, ℓ_t⟩` for linear runs.
    pub expected_loss: f64,
    /// `(ℓ_{t,i_t} − m_{t,i_t})²` for bandits, `⟨w_t, ℓ_t − m_t⟩²` for linear runs.
    pub variance: f64,
    /// Prediction `m_t`.
    pub prediction: Vec<f64>,
    /// Iterate `x_t`.
    pub iterate: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_vector: Option<Vec<f64>>,
}

/// Terminal metrics of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rounds: usize,
    pub learner_loss: f64,
    pub expected_learner_loss: f64,
    /// Loss of the best fixed action on the realized losses.
    pub comparator_loss: f64,
    pub regret: f64,
    pub expected_regret: f64,
    #[serde(flatten)]
    pub path_lengths: PathLengths,
    pub variance_sum: f64,
    pub eta: f64,
    /// `K ln T / η` for bandits, `ν ln T / η` for linear runs.
    pub log_term: f64,
    /// `η Σ variance` for bandits, `η d² Σ variance` for linear runs.
    pub variance_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub commit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub meta: Meta,
    pub summary: Summary,
    pub rows: Vec<Row>,
}

fn meta(config: &ExperimentConfig, seed: u64) -> Meta {
    let mut config = config.clone();
    config.seeds = vec![seed];
    config.grid.clear();
    Meta {
        config,
        seed,
        commit: commit_tag().to_string(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs the bandit or linear simulation selected by the learner kind.
pub fn run(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    if config.learner.kind.is_linear() {
        run_linear(config, seed)
    } else {
        run_mab(config, seed)
    }
}

pub fn run_mab(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    let k = config.stream.width()?;
    let horizon = config.stream.horizon;
    let eta = config.eta()?;
    let mut learner = config.build_bandit()?;
    let mut stream = config.stream.build_mab(seed)?;
    let mut rng = learner_rng(seed);

    let keep_rows = config.diagnostics.rows;
    let mut rows = Vec::with_capacity(if keep_rows { horizon } else { 0 });
    let mut history = Vec::with_capacity(horizon);
    let mut cumulative = vec![0.0; k];
    let mut paths = PathLengths::default();
    let mut prev: Option<Vec<f64>> = None;
    let (mut learner_loss, mut expected, mut variance_sum) = (0.0, 0.0, 0.0);

    for t in 1..=horizon {
        let loss = stream.next(t, &history).map_err(|e| e.at_round(t))?;
        if loss.len() != k || loss.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain("bandit losses must lie in [0, 1]^K".into()).at_round(t));
        }
        paths.push(prev.as_deref(), &loss);

        let w_dot = learner.distribution().dot(&loss);
        let m = learner.prediction();
        let x = learner.iterate().as_slice().to_vec();
        let arm = learner.act(&mut rng);
        let c = loss[arm];
        learner.observe(arm, c).map_err(|e| e.at_round(t))?;

        let variance = (c - m[arm]).powi(2);
        learner_loss += c;
        expected += w_dot;
        variance_sum += variance;
        for (acc, l) in cumulative.iter_mut().zip(&loss) {
            *acc += l;
        }
        history.push(arm);
        if keep_rows {
            rows.push(Row {
                t,
                action: Action::Arm(arm),
                loss: c,
                expected_loss: w_dot,
                variance,
                prediction: m,
                iterate: x,
                loss_vector: config.diagnostics.loss_vectors.then(|| loss.clone()),
            });
        }
        prev = Some(loss);
    }

    let comparator = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
    let ln_t = (horizon as f64).ln();
    Ok(RunRecord {
        meta: meta(config, seed),
        summary: Summary {
            rounds: horizon,
            learner_loss,
            expected_learner_loss: expected,
            comparator_loss: comparator,
            regret: learner_loss - comparator,
            expected_regret: expected - comparator,
            path_lengths: paths,
            variance_sum,
            eta,
            log_term: k as f64 * ln_t / eta,
            variance_term: eta * variance_sum,
        },
        rows,
    })
}

pub fn run_linear(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    let d = config.stream.width()?;
    let horizon = config.stream.horizon;
    let (mut state, strategy) = config.build_scribble()?;
    let mut stream = config.stream.build_linear(seed)?;
    let mut rng = learner_rng(seed);
    let eta = state.eta;
    let nu = 1.0;

    let keep_rows = config.diagnostics.rows;
    let mut rows = Vec::with_capacity(if keep_rows { horizon } else { 0 });
    let mut history: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    let mut cumulative = vec![0.0; d];
    let mut paths = PathLengths::default();
    let mut prev: Option<Vec<f64>> = None;
    let (mut learner_loss, mut expected, mut variance_sum) = (0.0, 0.0, 0.0);

    for t in 1..=horizon {
        let loss = stream.next(t, &history).map_err(|e| e.at_round(t))?;
        if loss.len() != d || dot(&loss, &loss) > 1.0 + 1e-12 {
            return Err(Error::Domain("linear losses must lie in the unit ball".into()).at_round(t));
        }
        paths.push(prev.as_deref(), &loss);
        let round = scribble_round(&mut state, strategy, &mut rng, &loss).map_err(|e| e.at_round(t))?;
        let x_dot = dot(&round.x, &loss);
        learner_loss += round.c;
        expected += x_dot;
        variance_sum += round.variance;
        for (acc, l) in cumulative.iter_mut().zip(&loss) {
            *acc += l;
        }
        if keep_rows {
            rows.push(Row {
                t,
                action: Action::Point(round.w.clone()),
                loss: round.c,
                expected_loss: x_dot,
                variance: round.variance,
                prediction: round.m,
                iterate: round.x,
                loss_vector: config.diagnostics.loss_vectors.then(|| loss.clone()),
            });
        }
        history.push(round.w);
        prev = Some(loss);
    }

    let comparator = -dot(&cumulative, &cumulative).sqrt();
    let ln_t = (horizon as f64).ln();
    Ok(RunRecord {
        meta: meta(config, seed),
        summary: Summary {
            rounds: horizon,
            learner_loss,
            expected_learner_loss: expected,
            comparator_loss: comparator,
            regret: learner_loss - comparator,
            expected_regret: expected - comparator,
            path_lengths: paths,
            variance_sum,
            eta,
            log_term: nu * ln_t / eta,
            variance_term: eta * (d * d) as f64 * variance_sum,
        },
        rows,
    })
}
