use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::buffer::RolloutBuffer;
use super::config::PpoConfig;
use super::curves::CurveRecord;
use super::normalize::RunningNorm;
use super::policy::{ActorInput, Critic, CriticInput, GaussianPolicy};
use super::ppo::{ppo_update, ActorCritic, UpdateStats};
use super::RlError;
use crate::env::{observation_len, privileged_len, Env, EnvConfig, Observation, PrivilegedState, TerminationReason, VecEnv, ACTION_PER_UAV};
use crate::nn::{Checkpoint, NnError};
use crate::physics::PhysicsParams;

pub const METHOD: &str = "dral";

/// Learner state stored next to the networks in a checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DralMeta {
    pub ppo: PpoConfig,
    pub obs_norm: RunningNorm,
    pub priv_norm: RunningNorm,
    pub iteration: usize,
    pub env_steps: u64,
}

/// Deterministic evaluation policy restored from a checkpoint.
#[derive(Clone, Debug)]
pub struct DralAgent {
    pub policy: GaussianPolicy,
    pub obs_norm: RunningNorm,
}

impl DralAgent {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, RlError> {
        if ck.method != METHOD {
            return Err(RlError::Checkpoint(format!("checkpoint method `{}` is not `{METHOD}`", ck.method)));
        }
        let meta: DralMeta =
            serde_json::from_value(ck.meta.clone()).map_err(|e| RlError::Checkpoint(format!("metadata: {e}")))?;
        Ok(Self { policy: GaussianPolicy::from_net(ck.net("actor")?.clone())?, obs_norm: meta.obs_norm })
    }

    pub fn act(&self, obs: &Observation) -> Result<Vec<f64>, RlError> {
        Ok(self.policy.mode(&ActorInput::new(obs, Some(&self.obs_norm)))?)
    }
}

pub struct TrainOutcome {
    pub curve: Vec<CurveRecord>,
    /// State after the last iteration (the initial state for 0 iterations).
    pub checkpoint: Checkpoint,
}

fn checkpoint(ac: &ActorCritic, meta: &DralMeta, seed: u64) -> Result<Checkpoint, RlError> {
    let mut ck = Checkpoint::new(METHOD, seed);
    ck.nets.insert("actor".into(), ac.policy.net.clone());
    ck.nets.insert("critic".into(), ac.critic.net.clone());
    ck.optimizers.insert("actor".into(), ac.actor_opt.clone());
    ck.optimizers.insert("critic".into(), ac.critic_opt.clone());
    ck.meta = serde_json::to_value(meta).map_err(|e| RlError::Checkpoint(e.to_string()))?;
    Ok(ck)
}

/// Options that do not affect learning.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Fill the wall-clock column; when false it is left empty so curves are
    /// reproducible byte for byte.
    pub record_wall_clock: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { record_wall_clock: true }
    }
}

/// Episode bookkeeping for one iteration's curve row.
#[derive(Default)]
pub(crate) struct EpisodeTally {
    returns: Vec<f64>,
    successes: usize,
}

impl EpisodeTally {
    pub fn record(&mut self, ret: f64, reason: TerminationReason) {
        self.returns.push(ret);
        if reason == TerminationReason::Success {
            self.successes += 1;
        }
    }

    pub fn mean_return(&self) -> Option<f64> {
        (!self.returns.is_empty()).then(|| self.returns.iter().sum::<f64>() / self.returns.len() as f64)
    }

    pub fn success_rate(&self) -> Option<f64> {
        (!self.returns.is_empty()).then(|| self.successes as f64 / self.returns.len() as f64)
    }
}

/// PPO with an asymmetric critic: repeated rollout collection, GAE, and
/// clipped-surrogate updates, fully determined by `seed`.
///
/// `on_checkpoint` receives every `config.checkpoint_every`-th checkpoint. If
/// the environment or learner fails mid-run the curve gathered so far is
/// returned inside [`RlError::Interrupted`].
pub fn train_loop<F>(
    env_config: &EnvConfig,
    physics: &PhysicsParams,
    config: &PpoConfig,
    seed: u64,
    options: &RunOptions,
    mut on_checkpoint: F,
) -> Result<TrainOutcome, RlError>
where
    F: FnMut(usize, &Checkpoint) -> Result<(), RlError>,
{
    config.validate().map_err(RlError::Config)?;
    let obs_dim = observation_len(env_config);
    let priv_dim = privileged_len(env_config.n_uavs);
    let act_dim = env_config.n_uavs * ACTION_PER_UAV;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let policy = GaussianPolicy::new(obs_dim, act_dim, &config.hidden, config.log_std_init, &mut rng)?;
    let critic = Critic::new(priv_dim, &config.hidden, &mut rng)?;
    let mut ac = ActorCritic::new(policy, critic, config);
    let mut meta = DralMeta {
        ppo: config.clone(),
        obs_norm: RunningNorm::new(obs_dim, config.normalize_inputs),
        priv_norm: RunningNorm::new(priv_dim, config.normalize_inputs),
        iteration: 0,
        env_steps: 0,
    };
    let mut curve = Vec::with_capacity(config.iterations);
    if config.iterations == 0 {
        return Ok(TrainOutcome { curve, checkpoint: checkpoint(&ac, &meta, seed)? });
    }

    let envs = (0..config.n_envs)
        .map(|_| Env::new(env_config.clone(), physics.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut venv = VecEnv::new(envs, seed);
    let started = Instant::now();
    let interrupted = |curve: &Vec<CurveRecord>, e: RlError| RlError::Interrupted { curve: curve.clone(), source: Box::new(e) };

    let (mut obs, mut privs): (Vec<Observation>, Vec<PrivilegedState>) = match venv.reset_all() {
        Ok(v) => v.into_iter().unzip(),
        Err(e) => return Err(interrupted(&curve, e.into())),
    };
    let mut running_returns = vec![0.0; config.n_envs];
    for iteration in 1..=config.iterations {
        let mut buffer = RolloutBuffer::new(config.n_envs);
        let mut tally = EpisodeTally::default();
        let result: Result<UpdateStats, RlError> = (|| {
            for _ in 0..config.rollout_len {
                let mut actions = Vec::with_capacity(config.n_envs);
                let mut pending = Vec::with_capacity(config.n_envs);
                for e in 0..config.n_envs {
                    meta.obs_norm.update(obs[e].as_slice());
                    meta.priv_norm.update(privs[e].as_slice());
                    let a_in = ActorInput::new(&obs[e], Some(&meta.obs_norm));
                    let c_in = CriticInput::new(&privs[e], Some(&meta.priv_norm));
                    let sample = ac.policy.sample(&a_in, &mut rng)?;
                    let value = ac.critic.value(&c_in)?;
                    actions.push(sample.action.clone());
                    pending.push((a_in, c_in, sample, value));
                }
                let results = venv.step(&actions)?;
                for (e, ((a_in, c_in, sample, value), r)) in pending.into_iter().zip(results).enumerate() {
                    running_returns[e] += r.reward;
                    if r.done {
                        tally.record(running_returns[e], r.reason);
                        running_returns[e] = 0.0;
                    }
                    buffer.push(a_in, c_in, sample.raw, sample.log_prob, r.reward, value, r.done)?;
                    obs[e] = r.observation;
                    privs[e] = r.privileged;
                }
            }
            let bootstrap = privs
                .iter()
                .map(|p| ac.critic.value(&CriticInput::new(p, Some(&meta.priv_norm))))
                .collect::<Result<Vec<_>, NnError>>()?;
            buffer.finish(bootstrap, config.gamma, config.lambda)?;
            ppo_update(&buffer, &mut ac, config, &mut rng)
        })();
        let stats = match result {
            Ok(s) => s,
            Err(e) => return Err(interrupted(&curve, e)),
        };
        meta.iteration = iteration;
        meta.env_steps += buffer.len() as u64;
        let rec = CurveRecord {
            method: METHOD.into(),
            iteration,
            env_steps: meta.env_steps,
            mean_return: tally.mean_return(),
            success_rate: tally.success_rate(),
            policy_loss: Some(stats.policy_loss),
            value_loss: Some(stats.value_loss),
            entropy: Some(stats.entropy),
            wall_clock_s: options.record_wall_clock.then(|| started.elapsed().as_secs_f64()),
        };
        log::info!(
            "{} policy loss {:.4} entropy {:.3} kl {:.4}",
            rec.progress_line(),
            stats.policy_loss,
            stats.entropy,
            stats.approx_kl
        );
        curve.push(rec);
        if config.checkpoint_every > 0 && iteration % config.checkpoint_every == 0 {
            let ck = checkpoint(&ac, &meta, seed)?;
            on_checkpoint(iteration, &ck).map_err(|e| interrupted(&curve, e))?;
        }
    }
    Ok(TrainOutcome { checkpoint: checkpoint(&ac, &meta, seed)?, curve })
}
