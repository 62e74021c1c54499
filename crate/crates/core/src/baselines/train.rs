use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::discretize::{discretize, MacroAction, MacroController, N_MACROS, N_STATES};
use super::dqn::{dqn_update, greedy_action, q_network, to_f64, DqnConfig, ReplayBuffer, Transition};
use super::macro_env::MacroEnv;
use super::schedule::EpsilonSchedule;
use super::tabular::{q_learning_update, sarsa_update, QTable};
use super::BaselineError;
use crate::env::{observation_len, Env, EnvConfig, Observation, TerminationReason};
use crate::nn::{Adam, Checkpoint, DenseNet};
use crate::physics::PhysicsParams;
use crate::rl::{CurveRecord, RunOptions};

pub const QLEARNING: &str = "qlearning";
pub const SARSA: &str = "sarsa";
pub const DQN: &str = "dqn";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TabularMethod {
    QLearning,
    Sarsa,
}

impl TabularMethod {
    pub fn name(self) -> &'static str {
        match self {
            TabularMethod::QLearning => QLEARNING,
            TabularMethod::Sarsa => SARSA,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabularConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Exploration schedule over agent decisions.
    pub epsilon: EpsilonSchedule,
    pub iterations: usize,
    /// Control steps per curve row.
    pub steps_per_iteration: usize,
    /// Control steps each macro-action is held.
    pub macro_repeat: usize,
}

impl Default for TabularConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.99,
            epsilon: EpsilonSchedule::default(),
            iterations: 100,
            steps_per_iteration: 2048,
            macro_repeat: 4,
        }
    }
}

impl TabularConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.epsilon.validate()?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err("tabular.alpha must lie in (0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err("tabular.gamma must lie in [0, 1]".into());
        }
        if self.steps_per_iteration == 0 || self.macro_repeat == 0 {
            return Err("tabular.steps_per_iteration and tabular.macro_repeat must be positive".into());
        }
        Ok(())
    }
}

/// Curve and final checkpoint of a baseline run.
pub struct BaselineOutcome {
    pub curve: Vec<CurveRecord>,
    pub checkpoint: Checkpoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabularMeta {
    config: TabularConfig,
    table: QTable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DqnMeta {
    config: DqnConfig,
    decisions: u64,
}

fn episode_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(k)
}

/// Per-iteration bookkeeping shared by the baseline loops.
struct Progress {
    method: &'static str,
    started: Instant,
    record_wall_clock: bool,
    env_steps: u64,
    returns: Vec<f64>,
    successes: usize,
    losses: Vec<f64>,
}

impl Progress {
    fn new(method: &'static str, options: &RunOptions) -> Self {
        Self {
            method,
            started: Instant::now(),
            record_wall_clock: options.record_wall_clock,
            env_steps: 0,
            returns: Vec::new(),
            successes: 0,
            losses: Vec::new(),
        }
    }

    fn episode(&mut self, ret: f64, reason: TerminationReason) {
        self.returns.push(ret);
        if reason == TerminationReason::Success {
            self.successes += 1;
        }
    }

    /// Curve row for `iteration`. `budget` is the nominal step count at the
    /// iteration boundary; the last macro-action may overrun it slightly.
    fn row(&mut self, iteration: usize, budget: u64) -> CurveRecord {
        let n = self.returns.len();
        let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        let rec = CurveRecord {
            method: self.method.into(),
            iteration,
            env_steps: budget,
            mean_return: mean(&self.returns),
            success_rate: (n > 0).then(|| self.successes as f64 / n as f64),
            policy_loss: None,
            value_loss: mean(&self.losses),
            entropy: None,
            wall_clock_s: self.record_wall_clock.then(|| self.started.elapsed().as_secs_f64()),
        };
        log::info!("{}", rec.progress_line());
        self.returns.clear();
        self.successes = 0;
        self.losses.clear();
        rec
    }
}

fn interrupted(curve: &[CurveRecord], e: BaselineError) -> BaselineError {
    BaselineError::Interrupted { curve: curve.to_vec(), source: Box::new(e) }
}

/// Tabular Q-learning or SARSA over the discretized macro-action interface.
pub fn train_tabular(
    method: TabularMethod,
    env_config: &EnvConfig,
    physics: &PhysicsParams,
    config: &TabularConfig,
    seed: u64,
    options: &RunOptions,
) -> Result<BaselineOutcome, BaselineError> {
    config.validate().map_err(BaselineError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut menv = MacroEnv::new(Env::new(env_config.clone(), physics.clone())?, config.macro_repeat)?;
    let mut q = QTable::new(N_STATES, N_MACROS);
    let mut progress = Progress::new(method.name(), options);
    let mut curve = Vec::with_capacity(config.iterations);
    let mut decisions = 0u64;
    let mut episode = 0u64;
    let mut current: Option<(usize, usize, f64)> = None;

    for iteration in 1..=config.iterations {
        let budget = (iteration * config.steps_per_iteration) as u64;
        let block = (|| -> Result<(), BaselineError> {
            while progress.env_steps < budget {
                let (s, a, ret) = match current.take() {
                    Some(c) => c,
                    None => {
                        let (s, _) = menv.reset_seeded(episode_seed(seed, episode))?;
                        episode += 1;
                        let a = q.epsilon_greedy(s, config.epsilon.value(decisions), &mut rng)?;
                        (s, a, 0.0)
                    }
                };
                let step = menv.step(a)?;
                decisions += 1;
                progress.env_steps += step.env_steps as u64;
                let eps = config.epsilon.value(decisions);
                let a_next = q.epsilon_greedy(step.state, eps, &mut rng)?;
                let before = q.get(s, a)?;
                match method {
                    TabularMethod::QLearning => {
                        q_learning_update(&mut q, s, a, step.reward, step.state, step.done, config.alpha, config.gamma)?
                    }
                    TabularMethod::Sarsa => sarsa_update(
                        &mut q,
                        s,
                        a,
                        step.reward,
                        step.state,
                        a_next,
                        step.done,
                        config.alpha,
                        config.gamma,
                    )?,
                }
                let td = (q.get(s, a)? - before) / config.alpha;
                progress.losses.push(td * td);
                let ret = ret + step.reward;
                if step.done {
                    progress.episode(ret, step.reason);
                } else {
                    current = Some((step.state, a_next, ret));
                }
            }
            Ok(())
        })();
        if let Err(e) = block {
            return Err(interrupted(&curve, e));
        }
        curve.push(progress.row(iteration, budget));
    }
    let mut ck = Checkpoint::new(method.name(), seed);
    ck.meta = serde_json::to_value(TabularMeta { config: config.clone(), table: q })
        .map_err(|e| BaselineError::Checkpoint(e.to_string()))?;
    Ok(BaselineOutcome { curve, checkpoint: ck })
}

fn obs_f32(obs: &Observation) -> Vec<f32> {
    obs.as_slice().iter().map(|&v| v as f32).collect()
}

/// Deep Q-learning on the actor's observation vector with the macro-action
/// head.
pub fn train_dqn(
    env_config: &EnvConfig,
    physics: &PhysicsParams,
    config: &DqnConfig,
    seed: u64,
    options: &RunOptions,
) -> Result<BaselineOutcome, BaselineError> {
    config.validate().map_err(BaselineError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut menv = MacroEnv::new(Env::new(env_config.clone(), physics.clone())?, config.macro_repeat)?;
    let mut net = q_network(observation_len(env_config), N_MACROS, &config.hidden, &mut rng)?;
    let mut target = net.clone();
    let mut opt = Adam::new(net.n_params(), config.lr);
    let mut replay = ReplayBuffer::new(config.replay_capacity);
    let mut progress = Progress::new(DQN, options);
    let mut curve = Vec::with_capacity(config.iterations);
    let mut decisions = 0u64;
    let mut episode = 0u64;
    let mut current: Option<(Observation, f64)> = None;

    for iteration in 1..=config.iterations {
        let budget = (iteration * config.steps_per_iteration) as u64;
        let block = (|| -> Result<(), BaselineError> {
            while progress.env_steps < budget {
                let (obs, ret) = match current.take() {
                    Some(c) => c,
                    None => {
                        let (_, obs) = menv.reset_seeded(episode_seed(seed, episode))?;
                        episode += 1;
                        (obs, 0.0)
                    }
                };
                let eps = config.epsilon.value(decisions);
                let a = if rand::Rng::random::<f64>(&mut rng) < eps {
                    rand::Rng::random_range(&mut rng, 0..N_MACROS)
                } else {
                    greedy_action(&net, obs.as_slice())?
                };
                let step = menv.step(a)?;
                decisions += 1;
                progress.env_steps += step.env_steps as u64;
                replay.push(Transition {
                    obs: obs_f32(&obs),
                    action: a,
                    reward: step.reward,
                    next_obs: obs_f32(&step.observation),
                    done: step.done,
                });
                if replay.len() >= config.learning_starts {
                    let batch = replay.sample(config.batch, &mut rng)?;
                    progress.losses.push(dqn_update(&mut net, &target, &batch, config.gamma, &mut opt)?);
                }
                if decisions.is_multiple_of(config.target_sync) {
                    target.copy_from(&net)?;
                }
                let ret = ret + step.reward;
                if step.done {
                    progress.episode(ret, step.reason);
                } else {
                    current = Some((step.observation, ret));
                }
            }
            Ok(())
        })();
        if let Err(e) = block {
            return Err(interrupted(&curve, e));
        }
        curve.push(progress.row(iteration, budget));
    }
    let mut ck = Checkpoint::new(DQN, seed);
    ck.nets.insert("q".into(), net);
    ck.nets.insert("target".into(), target);
    ck.optimizers.insert("q".into(), opt);
    ck.meta = serde_json::to_value(DqnMeta { config: config.clone(), decisions })
        .map_err(|e| BaselineError::Checkpoint(e.to_string()))?;
    Ok(BaselineOutcome { curve, checkpoint: ck })
}

#[derive(Clone, Debug)]
enum Chooser {
    Table(QTable),
    Net(DenseNet),
}

/// Greedy evaluation policy for a trained baseline. Chooses a macro-action
/// every `repeat` control steps and tracks it with the PI controller.
#[derive(Clone, Debug)]
pub struct MacroAgent {
    chooser: Chooser,
    controller: MacroController,
    repeat: usize,
    held: Option<(MacroAction, usize)>,
}

impl MacroAgent {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, BaselineError> {
        let bad = |e: serde_json::Error| BaselineError::Checkpoint(format!("metadata: {e}"));
        let (chooser, repeat) = match ck.method.as_str() {
            QLEARNING | SARSA => {
                let meta: TabularMeta = serde_json::from_value(ck.meta.clone()).map_err(bad)?;
                if meta.table.n_states() != N_STATES || meta.table.n_actions() != N_MACROS || !meta.table.is_finite() {
                    return Err(BaselineError::Checkpoint("Q-table has the wrong shape or non-finite entries".into()));
                }
                (Chooser::Table(meta.table), meta.config.macro_repeat)
            }
            DQN => {
                let meta: DqnMeta = serde_json::from_value(ck.meta.clone()).map_err(bad)?;
                (Chooser::Net(ck.net("q")?.clone()), meta.config.macro_repeat)
            }
            other => return Err(BaselineError::Checkpoint(format!("`{other}` is not a baseline method"))),
        };
        Ok(Self { chooser, controller: MacroController::new(), repeat: repeat.max(1), held: None })
    }

    /// Call at the start of every episode.
    pub fn reset(&mut self) {
        self.controller.reset();
        self.held = None;
    }

    pub fn act(&mut self, env: &Env, obs: &Observation) -> Result<Vec<f64>, BaselineError> {
        let m = match self.held {
            Some((m, left)) if left > 0 => {
                self.held = Some((m, left - 1));
                m
            }
            _ => {
                let id = match &self.chooser {
                    Chooser::Table(q) => q.greedy(discretize(env)?)?,
                    Chooser::Net(net) => greedy_action(net, &to_f64(&obs_f32(obs)))?,
                };
                let m = MacroAction::from_id(id)?;
                self.held = Some((m, self.repeat - 1));
                m
            }
        };
        self.controller.action(m, env)
    }
}
