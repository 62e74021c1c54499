use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::schedule::EpsilonSchedule;
use super::tabular::argmax;
use super::BaselineError;
use crate::nn::{Adam, DenseNet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    pub replay_capacity: usize,
    pub batch: usize,
    /// Hard target-network copy period, in agent decisions.
    pub target_sync: u64,
    /// Exploration schedule over agent decisions.
    pub epsilon: EpsilonSchedule,
    pub gamma: f64,
    pub lr: f64,
    pub hidden: Vec<usize>,
    /// Decisions collected before the first update.
    pub learning_starts: usize,
    pub iterations: usize,
    /// Control steps per curve row.
    pub steps_per_iteration: usize,
    /// Control steps each macro-action is held.
    pub macro_repeat: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            replay_capacity: 100_000,
            batch: 64,
            target_sync: 1000,
            epsilon: EpsilonSchedule::default(),
            gamma: 0.99,
            lr: 1e-3,
            hidden: vec![256, 256],
            learning_starts: 1000,
            iterations: 100,
            steps_per_iteration: 2048,
            macro_repeat: 4,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.epsilon.validate()?;
        if self.batch == 0 || self.replay_capacity < self.batch {
            return Err("dqn.replay_capacity must be at least dqn.batch, and dqn.batch positive".into());
        }
        if self.learning_starts < self.batch {
            return Err("dqn.learning_starts must be at least dqn.batch".into());
        }
        if self.target_sync == 0 || self.steps_per_iteration == 0 || self.macro_repeat == 0 {
            return Err("dqn.target_sync, dqn.steps_per_iteration, and dqn.macro_repeat must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(self.lr > 0.0) {
            return Err("dqn.gamma must lie in [0, 1] and dqn.lr be positive".into());
        }
        if self.hidden.contains(&0) {
            return Err("dqn.hidden widths must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: Vec<f32>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f32>,
    pub done: bool,
}

/// FIFO experience replay.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> Result<Vec<&Transition>, BaselineError> {
        if self.items.len() < batch {
            return Err(BaselineError::Config(format!("replay holds {} transitions, batch needs {batch}", self.items.len())));
        }
        Ok((0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect())
    }
}

pub(crate) fn to_f64(x: &[f32]) -> Vec<f64> {
    x.iter().map(|&v| v as f64).collect()
}

pub fn q_network<R: Rng>(obs_dim: usize, n_actions: usize, hidden: &[usize], rng: &mut R) -> Result<DenseNet, BaselineError> {
    let mut sizes = vec![obs_dim];
    sizes.extend_from_slice(hidden);
    sizes.push(n_actions);
    Ok(DenseNet::new(&sizes, rng)?)
}

pub fn greedy_action(net: &DenseNet, obs: &[f64]) -> Result<usize, BaselineError> {
    Ok(argmax(&net.predict(obs)?))
}

/// One gradient step on the mean squared TD error against the target
/// network. Returns the pre-update loss.
pub fn dqn_update(
    net: &mut DenseNet,
    target: &DenseNet,
    batch: &[&Transition],
    gamma: f64,
    opt: &mut Adam,
) -> Result<f64, BaselineError> {
    if batch.is_empty() {
        return Err(BaselineError::Config("empty DQN batch".into()));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = vec![0.0; net.n_params()];
    let mut loss = 0.0;
    let mut grad_out = vec![0.0; net.output_dim()];
    for t in batch {
        let next_max = if t.done {
            0.0
        } else {
            target.predict(&to_f64(&t.next_obs))?.into_iter().fold(f64::NEG_INFINITY, f64::max)
        };
        let y = t.reward + gamma * next_max;
        let cache = net.forward(&to_f64(&t.obs))?;
        let q = *cache
            .output()
            .get(t.action)
            .ok_or_else(|| BaselineError::Index(format!("action {} outside the Q head", t.action)))?;
        let err = q - y;
        loss += err * err * scale;
        grad_out.iter_mut().for_each(|g| *g = 0.0);
        grad_out[t.action] = 2.0 * err * scale;
        net.backward_into(&cache, &grad_out, &mut grads, false)?;
    }
    if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
        return Err(BaselineError::NonFinite(format!("DQN loss {loss}")));
    }
    opt.step(net.params_mut(), &grads)?;
    if let Some(i) = net.first_non_finite() {
        return Err(BaselineError::NonFinite(format!("Q-network parameter {i} after update")));
    }
    Ok(loss)
}
