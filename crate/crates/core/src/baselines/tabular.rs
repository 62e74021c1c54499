use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;

/// Dense |S|×|A| action-value table, row-major by state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self { n_states, n_actions, values: vec![0.0; n_states * n_actions] }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn index(&self, s: usize, a: usize) -> Result<usize, BaselineError> {
        if s >= self.n_states || a >= self.n_actions {
            return Err(BaselineError::Index(format!(
                "(s {s}, a {a}) outside a {}×{} table",
                self.n_states, self.n_actions
            )));
        }
        Ok(s * self.n_actions + a)
    }

    pub fn get(&self, s: usize, a: usize) -> Result<f64, BaselineError> {
        Ok(self.values[self.index(s, a)?])
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) -> Result<(), BaselineError> {
        let i = self.index(s, a)?;
        self.values[i] = v;
        Ok(())
    }

    pub fn row(&self, s: usize) -> Result<&[f64], BaselineError> {
        let i = self.index(s, 0)?;
        Ok(&self.values[i..i + self.n_actions])
    }

    pub fn max(&self, s: usize) -> Result<f64, BaselineError> {
        Ok(self.row(s)?.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Lowest-index maximizer.
    pub fn greedy(&self, s: usize) -> Result<usize, BaselineError> {
        Ok(argmax(self.row(s)?))
    }

    /// ε-greedy choice with ties broken toward the lowest index.
    pub fn epsilon_greedy<R: Rng>(&self, s: usize, epsilon: f64, rng: &mut R) -> Result<usize, BaselineError> {
        if rng.random::<f64>() < epsilon {
            return Ok(rng.random_range(0..self.n_actions));
        }
        self.greedy(s)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Off-policy TD: Q(s,a) += α(r + γ·max Q(s′,·)·(1−done) − Q(s,a)).
#[allow(clippy::too_many_arguments)]
pub fn q_learning_update(
    table: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    s_next: usize,
    done: bool,
    alpha: f64,
    gamma: f64,
) -> Result<(), BaselineError> {
    let next = if done { 0.0 } else { table.max(s_next)? };
    td_update(table, s, a, r + gamma * next, alpha)
}

/// On-policy TD: Q(s,a) += α(r + γ·Q(s′,a′)·(1−done) − Q(s,a)).
#[allow(clippy::too_many_arguments)]
pub fn sarsa_update(
    table: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    s_next: usize,
    a_next: usize,
    done: bool,
    alpha: f64,
    gamma: f64,
) -> Result<(), BaselineError> {
    let next = if done { 0.0 } else { table.get(s_next, a_next)? };
    td_update(table, s, a, r + gamma * next, alpha)
}

fn td_update(table: &mut QTable, s: usize, a: usize, target: f64, alpha: f64) -> Result<(), BaselineError> {
    let q = table.get(s, a)?;
    let updated = q + alpha * (target - q);
    if !updated.is_finite() {
        return Err(BaselineError::NonFinite(format!("Q({s},{a}) update produced {updated}")));
    }
    table.set(s, a, updated)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_reward_hand_computed() {
        let mut t = QTable::new(4, 2);
        q_learning_update(&mut t, 1, 0, 1.0, 2, true, 0.1, 0.99).unwrap();
        assert_eq!(t.get(1, 0).unwrap(), 0.1);
        let touched = t.values().iter().filter(|v| **v != 0.0).count();
        assert_eq!(touched, 1);
    }

    #[test]
    fn zero_td_error_is_no_op() {
        let mut t = QTable::new(3, 3);
        q_learning_update(&mut t, 0, 2, 0.0, 1, false, 0.5, 0.9).unwrap();
        assert_eq!(t, QTable::new(3, 3));
    }

    #[test]
    fn repeated_terminal_updates_approach_reward_monotonically() {
        let mut t = QTable::new(1, 1);
        let mut last = 0.0;
        for _ in 0..500 {
            q_learning_update(&mut t, 0, 0, 1.0, 0, true, 0.1, 0.99).unwrap();
            let q = t.get(0, 0).unwrap();
            assert!(q >= last && q <= 1.0);
            last = q;
        }
        assert!((1.0 - last).abs() < 1e-12);
    }

    #[test]
    fn sarsa_with_greedy_next_matches_q_learning() {
        let mut base = QTable::new(3, 3);
        for (i, v) in [0.3, -0.2, 0.9, 0.1, 0.4, 0.2, -1.0, 0.0, 0.5].iter().enumerate() {
            base.set(i / 3, i % 3, *v).unwrap();
        }
        let mut q = base.clone();
        let mut s = base.clone();
        q_learning_update(&mut q, 0, 1, 0.5, 1, false, 0.2, 0.9).unwrap();
        let a_next = s.greedy(1).unwrap();
        sarsa_update(&mut s, 0, 1, 0.5, 1, a_next, false, 0.2, 0.9).unwrap();
        assert_eq!(q, s);
        sarsa_update(&mut s, 2, 2, -0.7, 0, 0, true, 1.0, 0.9).unwrap();
        assert_eq!(s.get(2, 2).unwrap(), -0.7);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let mut t = QTable::new(2, 2);
        assert!(q_learning_update(&mut t, 2, 0, 0.0, 0, false, 0.1, 0.9).is_err());
        assert!(sarsa_update(&mut t, 0, 0, 0.0, 0, 5, false, 0.1, 0.9).is_err());
    }
}
