use super::discretize::{discretize, MacroAction, MacroController};
use super::BaselineError;
use crate::env::{Env, Observation, TerminationReason};

/// Outcome of holding one macro-action.
#[derive(Clone, Debug)]
pub struct MacroStep {
    pub state: usize,
    pub observation: Observation,
    /// Sum of the per-step rewards while the macro was held.
    pub reward: f64,
    pub done: bool,
    pub reason: TerminationReason,
    /// Control steps consumed.
    pub env_steps: usize,
}

/// Discrete-action view of [`Env`]: each decision holds a macro-action for
/// `repeat` control steps under the PI controller.
pub struct MacroEnv {
    pub env: Env,
    controller: MacroController,
    repeat: usize,
}

impl MacroEnv {
    pub fn new(env: Env, repeat: usize) -> Result<Self, BaselineError> {
        if repeat == 0 {
            return Err(BaselineError::Config("macro_repeat must be at least 1".into()));
        }
        Ok(Self { env, controller: MacroController::new(), repeat })
    }

    pub fn reset_seeded(&mut self, seed: u64) -> Result<(usize, Observation), BaselineError> {
        let (obs, _) = self.env.reset_seeded(seed)?;
        self.controller.reset();
        Ok((discretize(&self.env)?, obs))
    }

    pub fn step(&mut self, action: usize) -> Result<MacroStep, BaselineError> {
        let m = MacroAction::from_id(action)?;
        let mut reward = 0.0;
        let mut env_steps = 0;
        loop {
            let a = self.controller.action(m, &self.env)?;
            let r = self.env.step(&a)?;
            reward += r.reward;
            env_steps += 1;
            if r.done || env_steps == self.repeat {
                return Ok(MacroStep {
                    state: discretize(&self.env)?,
                    observation: r.observation,
                    reward,
                    done: r.done,
                    reason: r.reason,
                    env_steps,
                });
            }
        }
    }
}
