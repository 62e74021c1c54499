use super::config::{ExperimentConfig, Method};
use super::metrics::{MetricsSummary, TrialRecord};
use super::HarnessError;
use crate::baselines::MacroAgent;
use crate::env::{observation_len, Env, EnvConfig, Observation, TerminationReason};
use crate::nn::Checkpoint;
use crate::physics::PhysicsParams;
use crate::rl::DralAgent;
use crate::world::PayloadClass;

/// Deterministic evaluation policy of any method.
#[derive(Clone, Debug)]
pub enum Agent {
    Dral(DralAgent),
    Macro(MacroAgent),
}

impl Agent {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, HarnessError> {
        let method: Method = ck.method.parse().map_err(HarnessError::Input)?;
        Ok(match method {
            Method::Dral => Agent::Dral(DralAgent::from_checkpoint(ck).map_err(|e| HarnessError::Input(e.to_string()))?),
            _ => Agent::Macro(MacroAgent::from_checkpoint(ck).map_err(|e| HarnessError::Input(e.to_string()))?),
        })
    }

    pub fn reset(&mut self) {
        if let Agent::Macro(m) = self {
            m.reset();
        }
    }

    pub fn act(&mut self, env: &Env, obs: &Observation) -> Result<Vec<f64>, HarnessError> {
        match self {
            Agent::Dral(a) => a.act(obs).map_err(|e| HarnessError::Internal(e.to_string())),
            Agent::Macro(a) => a.act(env, obs).map_err(|e| HarnessError::Internal(e.to_string())),
        }
    }
}

/// Seeds of evaluation episodes live far from training episode seeds.
const EVAL_SEED_OFFSET: u64 = 1 << 40;

pub fn eval_episode_seed(seed: u64, class: PayloadClass, trial: usize) -> u64 {
    EVAL_SEED_OFFSET + seed.wrapping_mul(1_000_003).wrapping_add((class.index() * 10_000 + trial) as u64)
}

/// Runs one deterministic episode. Reach time is the number of control
/// steps to success times the control period.
pub fn run_episode(env: &mut Env, agent: &mut Agent, seed: u64, class: PayloadClass) -> Result<TrialRecord, HarnessError> {
    let (mut obs, _) = env.reset_seeded(seed).map_err(|e| HarnessError::Internal(e.to_string()))?;
    agent.reset();
    let mut path = 0.0;
    let mut last = env.state().expect("reset").transport_point();
    let reason = loop {
        let action = agent.act(env, &obs)?;
        let r = env.step(&action).map_err(|e| HarnessError::Internal(e.to_string()))?;
        let p = env.state().expect("reset").transport_point();
        if p.is_finite() && last.is_finite() {
            path += (p - last).norm();
        }
        last = p;
        obs = r.observation;
        if r.done {
            break r.reason;
        }
    };
    let steps = env.steps();
    Ok(TrialRecord {
        seed,
        class,
        outcome: reason,
        reach_time_s: (reason == TerminationReason::Success).then(|| steps as f64 * env.control_dt()),
        steps,
        path_length_m: path,
    })
}

/// Environment used to evaluate `class`.
pub fn eval_env_config(base: &EnvConfig, class: PayloadClass) -> EnvConfig {
    EnvConfig { payload_class: class, ..base.clone() }
}

/// Evaluates one trained policy on `n_trials` episodes per class for each
/// listed seed.
pub fn evaluate_agent(
    agent: &mut Agent,
    env_config: &EnvConfig,
    physics: &PhysicsParams,
    classes: &[PayloadClass],
    seeds: &[u64],
    n_trials: usize,
) -> Result<Vec<TrialRecord>, HarnessError> {
    if let Agent::Dral(a) = agent {
        let (want, have) = (observation_len(env_config), a.policy.obs_dim());
        if want != have {
            return Err(HarnessError::Input(format!("policy expects {have} observation values but the task provides {want}")));
        }
    }
    let mut trials = Vec::with_capacity(classes.len() * seeds.len() * n_trials);
    for &class in classes {
        let mut env = Env::new(eval_env_config(env_config, class), physics.clone()).map_err(|e| HarnessError::Config(e.to_string()))?;
        for &seed in seeds {
            for j in 0..n_trials {
                trials.push(run_episode(&mut env, agent, eval_episode_seed(seed, class, j), class)?);
            }
        }
    }
    Ok(trials)
}

/// Evaluates `checkpoint` under the protocol in `config`.
pub fn run_eval(checkpoint: &Checkpoint, config: &ExperimentConfig) -> Result<(MetricsSummary, Vec<TrialRecord>), HarnessError> {
    if checkpoint.method != config.method.name() {
        return Err(HarnessError::Input(format!(
            "checkpoint was trained with `{}` but the config selects `{}`",
            checkpoint.method, config.method
        )));
    }
    let mut agent = Agent::from_checkpoint(checkpoint)?;
    let trials = evaluate_agent(
        &mut agent,
        &config.env,
        &config.physics,
        &config.eval.classes,
        &config.eval.seeds,
        config.eval.n_trials,
    )?;
    Ok((MetricsSummary::from_trials(config.method.name(), &trials), trials))
}
