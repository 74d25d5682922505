use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adversary::{
    AdaptiveLowerBound, ConstantStream, IidUniform, LinearDrift, LossStream, Piecewise,
};
use crate::error::{Error, Result};
use crate::linear::{PredictionStrategy, ScribbleState};
use crate::mab::{Alg1State, Alg2State, BanditLearner, Exp3State, WeiLuoState, ETA_MAX};
use crate::omd::RegularizerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Alg1,
    Alg2,
    WeiLuo,
    Exp3,
    Scribble,
}

impl LearnerKind {
    pub fn is_linear(self) -> bool {
        self == LearnerKind::Scribble
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamName {
    Piecewise,
    IidUniform,
    Constant,
    AdaptiveLowerbound,
    LinearDrift,
    LinearConstant,
}

impl StreamName {
    pub fn is_linear(self) -> bool {
        matches!(self, StreamName::LinearDrift | StreamName::LinearConstant)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    /// Learning rate; tuned from `path_length_estimate` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Bias parameter; `8η` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Minority threshold of `alg2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Exp3 learning rate, preferred over `eta`; `√(ln K / (T K))` when both are absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<PredictionStrategy>,
    /// Regularizer of `wei_luo`; log-barrier when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<RegularizerKind>,
    /// Path-length estimate used to tune `eta`; the horizon when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_length_estimate: Option<f64>,
}

impl LearnerConfig {
    pub fn new(kind: LearnerKind) -> Self {
        Self {
            kind,
            eta: None,
            alpha: None,
            beta: None,
            lr: None,
            strategy: None,
            regularizer: None,
            path_length_estimate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    pub kind: StreamName,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_arms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_switches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    /// Loss vector of the constant streams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<Vec<f64>>,
}

impl StreamConfig {
    pub fn new(kind: StreamName, horizon: usize) -> Self {
        Self {
            kind,
            horizon,
            num_arms: None,
            dim: None,
            num_switches: None,
            gap: None,
            gamma: None,
            step_size: None,
            loss: None,
        }
    }

    /// Length of the loss vectors.
    pub fn width(&self) -> Result<usize> {
        let from_loss = self.loss.as_ref().map(Vec::len);
        let width = if self.kind.is_linear() {
            self.dim.or(from_loss)
        } else {
            self.num_arms.or(from_loss)
        };
        let name = if self.kind.is_linear() { "stream.dim" } else { "stream.num_arms" };
        match width {
            Some(w) if w > 0 => Ok(w),
            _ => Err(Error::Config(format!("{name} must be a positive integer"))),
        }
    }

    fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("stream.{name} is required for this stream")))
    }

    fn constant(&self) -> Result<ConstantStream> {
        let loss = self
            .loss
            .clone()
            .ok_or_else(|| Error::Config("stream.loss is required for constant streams".into()))?;
        if loss.len() != self.width()? {
            return Err(Error::Config("stream.loss length disagrees with the dimension".into()));
        }
        ConstantStream::new(loss, self.horizon)
    }

    pub fn build_mab(&self, seed: u64) -> Result<Box<dyn LossStream<usize>>> {
        let k = self.width()?;
        let t = self.horizon;
        Ok(match self.kind {
            StreamName::Piecewise => Box::new(Piecewise::new(
                k,
                t,
                self.num_switches.unwrap_or(0),
                self.gap.unwrap_or(0.5),
                seed,
            )?),
            StreamName::IidUniform => Box::new(IidUniform::new(k, t, seed)?),
            StreamName::Constant => Box::new(self.constant()?),
            StreamName::AdaptiveLowerbound => Box::new(AdaptiveLowerBound::new(
                k,
                t,
                Self::require(self.gamma, "gamma")?,
                seed,
            )?),
            other => {
                return Err(Error::Config(format!(
                    "stream {other:?} emits linear losses, not bandit losses"
                )))
            }
        })
    }

    pub fn build_linear(&self, seed: u64) -> Result<Box<dyn LossStream<Vec<f64>>>> {
        let d = self.width()?;
        Ok(match self.kind {
            StreamName::LinearDrift => Box::new(LinearDrift::new(
                d,
                self.horizon,
                Self::require(self.step_size, "step_size")?,
                seed,
            )?),
            StreamName::LinearConstant => Box::new(self.constant()?),
            other => {
                return Err(Error::Config(format!(
                    "stream {other:?} emits bandit losses, not linear losses"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// Keep per-round rows in the record.
    #[serde(default = "yes")]
    pub rows: bool,
    /// Include the full loss vector in each row.
    #[serde(default = "yes")]
    pub loss_vectors: bool,
}

fn yes() -> bool {
    true
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            rows: true,
            loss_vectors: true,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// One experiment: a learner, a stream, seeds and output settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub learner: LearnerConfig,
    pub stream: StreamConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Destination file; never echoed into outputs.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    /// Sweep grid: dotted config key to list of values.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid: BTreeMap<String, Vec<Value>>,
}

impl ExperimentConfig {
    pub fn new(learner: LearnerConfig, stream: StreamConfig) -> Self {
        Self {
            learner,
            stream,
            seeds: default_seeds(),
            output: None,
            format: OutputFormat::default(),
            diagnostics: Diagnostics::default(),
            grid: BTreeMap::new(),
        }
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let config: Self =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a JSON config and applies `key=value` overrides before validation.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (k, v) in overrides {
            apply_override(&mut value, k, v)?;
        }
        Self::from_value(value)
    }

    /// Checks learner preconditions and stream compatibility without running.
    pub fn validate(&self) -> Result<()> {
        if self.stream.horizon == 0 {
            return Err(Error::Config("stream.horizon must be positive".into()));
        }
        if self.learner.kind.is_linear() != self.stream.kind.is_linear() {
            return Err(Error::Config(format!(
                "learner {:?} cannot play stream {:?}",
                self.learner.kind, self.stream.kind
            )));
        }
        if self.learner.kind.is_linear() {
            self.stream.build_linear(0)?;
            self.build_scribble()?;
        } else {
            self.stream.build_mab(0)?;
            self.build_bandit()?;
        }
        Ok(())
    }

    fn estimate(&self) -> Result<f64> {
        let v = self
            .learner
            .path_length_estimate
            .unwrap_or(self.stream.horizon as f64);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("path_length_estimate {v} must be positive")));
        }
        Ok(v)
    }

    /// Learning rate in effect: the configured one, else the tuned default.
    pub fn eta(&self) -> Result<f64> {
        if let (LearnerKind::Exp3, Some(lr)) = (self.learner.kind, self.learner.lr) {
            return Ok(lr);
        }
        if let Some(eta) = self.learner.eta {
            return Ok(eta);
        }
        let width = self.stream.width()?;
        let t = self.stream.horizon;
        let v = self.estimate()?;
        Ok(match self.learner.kind {
            LearnerKind::Scribble => ScribbleState::default_eta(width, t, v),
            LearnerKind::Exp3 => Exp3State::default_lr(width, t),
            kind => {
                let k = width as f64;
                let cap = if kind == LearnerKind::Alg2 { ETA_MAX.min(1.0 / k) } else { ETA_MAX };
                (k * (t.max(2) as f64).ln() / v).sqrt().min(cap)
            }
        })
    }

    pub fn build_bandit(&self) -> Result<Box<dyn BanditLearner>> {
        let k = self.stream.width()?;
        let l = &self.learner;
        let eta = self.eta()?;
        Ok(match l.kind {
            LearnerKind::Alg1 => Box::new(Alg1State::with_alpha(k, eta, l.alpha.unwrap_or(8.0 * eta))?),
            LearnerKind::Alg2 => Box::new(Alg2State::with_alpha(
                k,
                eta,
                l.beta.ok_or_else(|| Error::Config("learner.beta is required for alg2".into()))?,
                l.alpha.unwrap_or(8.0 * eta),
            )?),
            LearnerKind::WeiLuo => Box::new(WeiLuoState::with_regularizer(
                k,
                eta,
                l.regularizer.unwrap_or(RegularizerKind::LogBarrier),
            )?),
            LearnerKind::Exp3 => Box::new(Exp3State::new(k, eta)?),
            LearnerKind::Scribble => {
                return Err(Error::Config("scribble is a linear-bandit learner".into()))
            }
        })
    }

    pub fn build_scribble(&self) -> Result<(ScribbleState, PredictionStrategy)> {
        let strategy = self.learner.strategy.unwrap_or(PredictionStrategy::OptionII);
        Ok((ScribbleState::new(self.stream.width()?, self.eta()?)?, strategy))
    }
}

/// Sets the dotted `key` in a JSON config to `raw`, parsed as JSON when
/// possible and taken as a string otherwise.
pub fn apply_override(config: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(config, key, value)
}

pub(crate) fn set_path(config: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key {key:?}")));
    }
    let mut node = config;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-object")))?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "learner": {"kind": "alg1", "eta": 0.005},
            "stream": {"kind": "piecewise", "horizon": 100, "num_arms": 3, "num_switches": 2}
        })
    }

    #[test]
    fn overrides_parse_json_and_strings() {
        let mut v = base();
        apply_override(&mut v, "stream.num_switches", "5").unwrap();
        apply_override(&mut v, "learner.kind", "exp3").unwrap();
        apply_override(&mut v, "learner.lr", "0.1").unwrap();
        let c = ExperimentConfig::from_value(v).unwrap();
        assert_eq!(c.stream.num_switches, Some(5));
        assert_eq!(c.learner.kind, LearnerKind::Exp3);
        assert_eq!(c.eta().unwrap(), 0.1);
    }

    #[test]
    fn validation_catches_preconditions() {
        let mut v = base();
        apply_override(&mut v, "learner.eta", "0.01").unwrap();
        assert!(ExperimentConfig::from_value(v).is_err());
        let mut v = base();
        apply_override(&mut v, "stream.kind", "linear_drift").unwrap();
        assert!(ExperimentConfig::from_value(v).is_err());
        let mut v = base();
        apply_override(&mut v, "learner.kind", "alg2").unwrap();
        assert!(ExperimentConfig::from_value(v).is_err(), "alg2 needs beta");
        let mut v = base();
        apply_override(&mut v, "stream.colour", "red").unwrap();
        assert!(ExperimentConfig::from_value(v).is_err());
    }

    #[test]
    fn tuned_eta_respects_caps() {
        let mut v = base();
        v["learner"].as_object_mut().unwrap().remove("eta");
        let c = ExperimentConfig::from_value(v).unwrap();
        assert_eq!(c.eta().unwrap(), ETA_MAX);
    }

    #[test]
    fn output_path_is_not_echoed() {
        let mut v = base();
        apply_override(&mut v, "output", "/tmp/x.json").unwrap();
        let c = ExperimentConfig::from_value(v).unwrap();
        assert!(c.output.is_some());
        assert!(serde_json::to_value(&c).unwrap().get("output").is_none());
    }
}
