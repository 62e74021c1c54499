use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baselines::{DqnConfig, TabularConfig};
use crate::env::EnvConfig;
use crate::nn::write_atomic;
use crate::physics::PhysicsParams;
use crate::rl::PpoConfig;
use crate::world::PayloadClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dral,
    #[serde(rename = "qlearning")]
    QLearning,
    Sarsa,
    Dqn,
}

impl Method {
    /// Table order.
    pub const ALL: [Method; 4] = [Method::Dral, Method::Sarsa, Method::Dqn, Method::QLearning];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dral => crate::rl::METHOD,
            Method::QLearning => crate::baselines::QLEARNING,
            Method::Sarsa => crate::baselines::SARSA,
            Method::Dqn => crate::baselines::DQN,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected dral, qlearning, sarsa, or dqn)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Episodes per class per seed.
    pub n_trials: usize,
    pub classes: Vec<PayloadClass>,
    /// One training run and one evaluation block per seed.
    pub seeds: Vec<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { n_trials: 10, classes: PayloadClass::ALL.to_vec(), seeds: vec![0, 1, 2] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Fill the wall-clock column of learning curves. Off makes curve files
    /// reproducible byte for byte.
    pub wall_clock: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs"), wall_clock: true }
    }
}

/// One experiment: which learner, the task, and the evaluation protocol.
///
/// Learner blocks for other methods may be present (`bench` trains all
/// four); the block for `method` falls back to its defaults when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub physics: PhysicsParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ppo: Option<PpoConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qlearning: Option<TabularConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sarsa: Option<TabularConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dqn: Option<DqnConfig>,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            env: EnvConfig::default(),
            physics: PhysicsParams::default(),
            ppo: None,
            qlearning: None,
            sarsa: None,
            dqn: None,
            eval: EvalConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn ppo(&self) -> PpoConfig {
        self.ppo.clone().unwrap_or_default()
    }

    pub fn tabular(&self, method: Method) -> TabularConfig {
        match method {
            Method::Sarsa => self.sarsa.clone(),
            _ => self.qlearning.clone(),
        }
        .unwrap_or_default()
    }

    pub fn dqn(&self) -> DqnConfig {
        self.dqn.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), String> {
        self.env.validate()?;
        self.physics.validate()?;
        if let Some(p) = &self.ppo {
            p.validate()?;
        }
        for t in [&self.qlearning, &self.sarsa].into_iter().flatten() {
            t.validate()?;
        }
        if let Some(d) = &self.dqn {
            d.validate()?;
        }
        if self.eval.seeds.is_empty() {
            return Err("eval.seeds must not be empty".into());
        }
        if self.eval.classes.is_empty() {
            return Err("eval.classes must not be empty".into());
        }
        Ok(())
    }

    /// Parses and validates a config document. Unknown keys are errors.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate().map_err(HarnessError::Config)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        write_atomic(path, self.to_toml()?.as_bytes()).map_err(|e| HarnessError::io(path, e))
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
