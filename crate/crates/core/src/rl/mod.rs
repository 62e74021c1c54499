//! Proximal policy optimization with generalized advantage estimation and an
//! asymmetric actor-critic: the actor sees observations, the critic sees
//! privileged state.

mod buffer;
mod config;
mod curves;
mod gae;
mod normalize;
mod policy;
mod ppo;
mod train;

use thiserror::Error;

pub use buffer::RolloutBuffer;
pub use config::PpoConfig;
pub use curves::{curves_to_csv, read_curves, write_curves, CurveRecord, CURVE_HEADER};
pub use gae::{compute_gae, normalize_advantages};
pub use normalize::RunningNorm;
pub use policy::{
    gaussian_entropy, gaussian_log_prob, sample_action, unit_log_density_at_mean, ActionDist, ActorInput, Critic,
    CriticInput, GaussianPolicy, SampledAction, LOG_STD_MAX, LOG_STD_MIN,
};
pub use ppo::{clipped_surrogate, ppo_update, ActorCritic, UpdateStats};
pub use train::{train_loop, DralAgent, DralMeta, RunOptions, TrainOutcome, METHOD};

use crate::env::EnvError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("invalid learner config: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("training stopped after {} iterations: {source}", curve.len())]
    Interrupted { curve: Vec<CurveRecord>, source: Box<RlError> },
}
