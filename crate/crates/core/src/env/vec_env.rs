use super::episode::{Env, StepResult};
use super::obs::{Observation, PrivilegedState};
use super::EnvError;

/// `E` independent environments stepped in lockstep. A finished episode is
/// reset immediately; its [`StepResult`] keeps the terminal reward and
/// reason but carries the first observation of the next episode.
#[derive(Clone, Debug)]
pub struct VecEnv {
    envs: Vec<Env>,
    base_seed: u64,
    episodes: Vec<u64>,
}

impl VecEnv {
    pub fn new(envs: Vec<Env>, base_seed: u64) -> Self {
        let n = envs.len();
        Self { envs, base_seed, episodes: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[Env] {
        &self.envs
    }

    /// Seed of episode `k` of environment `i`: distinct across both indices.
    pub fn episode_seed(&self, i: usize, k: u64) -> u64 {
        self.base_seed
            .wrapping_mul(1_000_003)
            .wrapping_add(k.wrapping_mul(self.envs.len() as u64).wrapping_add(i as u64))
    }

    fn reset_one(&mut self, i: usize) -> Result<(Observation, PrivilegedState), EnvError> {
        let seed = self.episode_seed(i, self.episodes[i]);
        self.episodes[i] += 1;
        self.envs[i].reset_seeded(seed)
    }

    pub fn reset_all(&mut self) -> Result<Vec<(Observation, PrivilegedState)>, EnvError> {
        (0..self.envs.len()).map(|i| self.reset_one(i)).collect()
    }

    pub fn step(&mut self, actions: &[Vec<f64>]) -> Result<Vec<StepResult>, EnvError> {
        if actions.len() != self.envs.len() {
            return Err(EnvError::Action(format!("{} actions for {} environments", actions.len(), self.envs.len())));
        }
        let mut out = Vec::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            let mut r = self.envs[i].step(a)?;
            if r.done {
                let (obs, privileged) = self.reset_one(i)?;
                r.observation = obs;
                r.privileged = privileged;
            }
            out.push(r);
        }
        Ok(out)
    }
}
