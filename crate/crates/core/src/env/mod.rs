//! Episodic task wrapper around the simulator: action mapping, shaped
//! reward, termination, domain randomization, and the split between the
//! actor's partial observation and the critic's privileged state.

mod config;
mod episode;
mod obs;
mod randomize;
mod rules;
mod vec_env;

use thiserror::Error;

pub use config::{EnvConfig, RandomizationConfig, RewardWeights};
pub use episode::{Env, StepResult, TraceRecord, ACTION_PER_UAV};
pub use obs::{
    features_per_uav, observation_len, privileged_len, Observation, PrivilegedState, OBS_HIGH, OBS_LOW, PAYLOAD_BLOCK,
    UAV_BLOCK,
};
pub use randomize::{randomize, DomainDraw};
pub use rules::{collided, crashed, payload_tilt, reward, succeeded, terminated, TerminationReason};
pub use vec_env::VecEnv;

use crate::physics::PhysicsError;
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}
