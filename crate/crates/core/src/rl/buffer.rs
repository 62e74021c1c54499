use super::gae::compute_gae;
use super::policy::{ActorInput, CriticInput};
use super::RlError;

/// Transitions from `n_envs` environments, stored time-major
/// (`index = t · n_envs + env`).
#[derive(Clone, Debug, Default)]
pub struct RolloutBuffer {
    pub n_envs: usize,
    pub obs: Vec<ActorInput>,
    pub privileged: Vec<CriticInput>,
    /// Unclamped sampled actions.
    pub actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    /// V of the state following the last stored step, per environment.
    pub bootstrap: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(n_envs: usize) -> Self {
        Self { n_envs, ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        obs: ActorInput,
        privileged: CriticInput,
        action: Vec<f64>,
        log_prob: f64,
        reward: f64,
        value: f64,
        done: bool,
    ) -> Result<(), RlError> {
        if !log_prob.is_finite() {
            return Err(RlError::NonFinite(format!("log-probability {log_prob} at buffer index {}", self.len())));
        }
        self.obs.push(obs);
        self.privileged.push(privileged);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        self.dones.push(done);
        Ok(())
    }

    /// Fills `advantages` and `returns` with per-environment GAE.
    pub fn finish(&mut self, bootstrap: Vec<f64>, gamma: f64, lambda: f64) -> Result<(), RlError> {
        let e = self.n_envs;
        if bootstrap.len() != e || !self.len().is_multiple_of(e) {
            return Err(RlError::Shape(format!("{} steps and {} bootstrap values for {e} envs", self.len(), bootstrap.len())));
        }
        let steps = self.len() / e;
        self.advantages = vec![0.0; self.len()];
        self.returns = vec![0.0; self.len()];
        for (k, &boot) in bootstrap.iter().enumerate() {
            let idx: Vec<usize> = (0..steps).map(|t| t * e + k).collect();
            let r: Vec<f64> = idx.iter().map(|&i| self.rewards[i]).collect();
            let v: Vec<f64> = idx.iter().map(|&i| self.values[i]).collect();
            let d: Vec<bool> = idx.iter().map(|&i| self.dones[i]).collect();
            let (adv, ret) = compute_gae(&r, &v, &d, boot, gamma, lambda)?;
            for (j, &i) in idx.iter().enumerate() {
                self.advantages[i] = adv[j];
                self.returns[i] = ret[j];
            }
        }
        self.bootstrap = bootstrap;
        Ok(())
    }
}
