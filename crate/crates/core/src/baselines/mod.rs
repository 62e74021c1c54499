//! Comparison learners: tabular Q-learning, tabular SARSA, and deep
//! Q-learning. All three act through a discretized interface of
//! centralized macro-actions tracked by a PI velocity controller.

mod discretize;
mod dqn;
pub mod gridworld;
mod macro_env;
mod schedule;
mod tabular;
mod train;

use thiserror::Error;

pub use discretize::{
    discretize, formation_heading, state_bins, MacroAction, MacroController, StateBins, BEARING_BINS, N_MACROS,
    N_STATES, OBSTACLE_EDGES, RANGE_EDGES, SPEED_EDGES, TILT_EDGES_DEG,
};
pub use dqn::{dqn_update, greedy_action, q_network, DqnConfig, ReplayBuffer, Transition};
pub use macro_env::{MacroEnv, MacroStep};
pub use schedule::EpsilonSchedule;
pub use tabular::{q_learning_update, sarsa_update, QTable};
pub use train::{
    train_dqn, train_tabular, BaselineOutcome, MacroAgent, TabularConfig, TabularMethod, DQN, QLEARNING, SARSA,
};

use crate::env::EnvError;
use crate::nn::NnError;
use crate::rl::CurveRecord;
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("invalid baseline config: {0}")]
    Config(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("training stopped after {} iterations: {source}", curve.len())]
    Interrupted { curve: Vec<CurveRecord>, source: Box<BaselineError> },
}
