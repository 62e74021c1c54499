use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    /// Surrogate clip range ε.
    pub clip: f64,
    /// Discount γ.
    pub gamma: f64,
    /// GAE λ.
    pub lambda: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Steps collected per environment per iteration.
    pub rollout_len: usize,
    pub n_envs: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden: Vec<usize>,
    /// Initial log standard deviation of every action dimension.
    pub log_std_init: f64,
    pub iterations: usize,
    /// Checkpoint period in iterations; 0 keeps only the final checkpoint.
    pub checkpoint_every: usize,
    pub normalize_advantages: bool,
    /// Running mean/std normalization of actor and critic inputs.
    pub normalize_inputs: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip: 0.2,
            gamma: 0.99,
            lambda: 0.95,
            epochs: 4,
            minibatch: 256,
            rollout_len: 2048,
            n_envs: 1,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            hidden: vec![256, 256],
            log_std_init: -0.5,
            iterations: 100,
            checkpoint_every: 0,
            normalize_advantages: true,
            normalize_inputs: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err("ppo.clip must lie in (0, 1)".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.lambda) {
            return Err("ppo.gamma and ppo.lambda must lie in [0, 1]".into());
        }
        if self.epochs == 0 || self.minibatch == 0 || self.rollout_len == 0 || self.n_envs == 0 {
            return Err("ppo.epochs, minibatch, rollout_len, and n_envs must be positive".into());
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0 && self.max_grad_norm > 0.0) {
            return Err("ppo learning rates and max_grad_norm must be positive".into());
        }
        if !(self.entropy_coef >= 0.0 && self.value_coef >= 0.0) {
            return Err("ppo loss coefficients must be non-negative".into());
        }
        if self.hidden.contains(&0) {
            return Err("ppo.hidden layer sizes must be positive".into());
        }
        if !(-5.0..=1.0).contains(&self.log_std_init) {
            return Err("ppo.log_std_init must lie in [-5, 1]".into());
        }
        Ok(())
    }
}
