//! Deterministic 5×5 gridworld used as a tabular-learning oracle.

use rand::Rng;

use super::tabular::QTable;

pub const SIZE: usize = 5;
pub const N_STATES: usize = SIZE * SIZE;
/// Up, down, left, right.
pub const N_ACTIONS: usize = 4;
pub const GAMMA: f64 = 0.9;
pub const GOAL: (usize, usize) = (4, 4);
pub const PIT: (usize, usize) = (3, 3);
pub const WALLS: [(usize, usize); 3] = [(1, 1), (1, 2), (3, 1)];
const STEP_REWARD: f64 = -0.01;
const GOAL_REWARD: f64 = 1.0;
const PIT_REWARD: f64 = -1.0;

pub fn state(row: usize, col: usize) -> usize {
    row * SIZE + col
}

pub fn cell(s: usize) -> (usize, usize) {
    (s / SIZE, s % SIZE)
}

pub fn is_wall(s: usize) -> bool {
    WALLS.contains(&cell(s))
}

pub fn is_terminal(s: usize) -> bool {
    cell(s) == GOAL || cell(s) == PIT
}

/// Deterministic transition: moves into walls or off the grid stay put.
pub fn step(s: usize, a: usize) -> (usize, f64, bool) {
    let (r, c) = cell(s);
    let (nr, nc) = match a {
        0 => (r.saturating_sub(1), c),
        1 => ((r + 1).min(SIZE - 1), c),
        2 => (r, c.saturating_sub(1)),
        _ => (r, (c + 1).min(SIZE - 1)),
    };
    let next = if is_wall(state(nr, nc)) { s } else { state(nr, nc) };
    match cell(next) {
        GOAL => (next, GOAL_REWARD, true),
        PIT => (next, PIT_REWARD, true),
        _ => (next, STEP_REWARD, false),
    }
}

/// States an episode may start from: every open, non-terminal cell.
pub fn start_states() -> Vec<usize> {
    (0..N_STATES).filter(|&s| !is_wall(s) && !is_terminal(s)).collect()
}

/// Exact optimal action values by value iteration to a fixed point.
pub fn value_iteration() -> QTable {
    let mut v = [0.0f64; N_STATES];
    loop {
        let mut delta = 0.0f64;
        for s in start_states() {
            let best = (0..N_ACTIONS).map(|a| backup(&v, s, a)).fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < 1e-14 {
            break;
        }
    }
    let mut q = QTable::new(N_STATES, N_ACTIONS);
    for s in start_states() {
        for a in 0..N_ACTIONS {
            q.set(s, a, backup(&v, s, a)).expect("in range");
        }
    }
    q
}

fn backup(v: &[f64], s: usize, a: usize) -> f64 {
    let (next, r, done) = step(s, a);
    r + if done { 0.0 } else { GAMMA * v[next] }
}

/// Actions within `tol` of the best value in `s`.
pub fn optimal_actions(q: &QTable, s: usize, tol: f64) -> Vec<usize> {
    let best = q.max(s).expect("in range");
    (0..N_ACTIONS).filter(|&a| q.get(s, a).expect("in range") >= best - tol).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TabularRule {
    QLearning,
    Sarsa,
}

/// Trains on the gridworld with exploring starts, ε decaying as
/// `max(ε_min, 1/(1 + k/τ))` over episodes k.
pub fn train_gridworld<R: Rng>(rule: TabularRule, episodes: usize, alpha: f64, rng: &mut R) -> QTable {
    let starts = start_states();
    let mut q = QTable::new(N_STATES, N_ACTIONS);
    const MAX_LEN: usize = 100;
    for k in 0..episodes {
        let eps = (1.0 / (1.0 + k as f64 / 2000.0)).max(0.01);
        let mut s = starts[rng.random_range(0..starts.len())];
        let mut a = q.epsilon_greedy(s, eps, rng).expect("in range");
        for _ in 0..MAX_LEN {
            let (next, r, done) = step(s, a);
            let a_next = q.epsilon_greedy(next, eps, rng).expect("in range");
            match rule {
                TabularRule::QLearning => super::q_learning_update(&mut q, s, a, r, next, done, alpha, GAMMA),
                TabularRule::Sarsa => super::sarsa_update(&mut q, s, a, r, next, a_next, done, alpha, GAMMA),
            }
            .expect("in range");
            if done {
                break;
            }
            s = next;
            a = a_next;
        }
    }
    q
}

/// Non-terminal open states whose learned greedy action is not optimal
/// under `oracle`. States with several optimal actions accept any of them.
pub fn policy_mismatches(learned: &QTable, oracle: &QTable) -> Vec<usize> {
    start_states()
        .into_iter()
        .filter(|&s| !optimal_actions(oracle, s, 1e-9).contains(&learned.greedy(s).expect("in range")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_iteration_satisfies_bellman_optimality() {
        let q = value_iteration();
        for s in start_states() {
            for a in 0..N_ACTIONS {
                let (next, r, done) = step(s, a);
                let target = r + if done { 0.0 } else { GAMMA * q.max(next).unwrap() };
                assert!((q.get(s, a).unwrap() - target).abs() < 1e-12);
            }
        }
        // Next to the goal, moving into it is the unique best action.
        assert_eq!(optimal_actions(&q, state(3, 4), 1e-9), vec![1]);
        assert_eq!(optimal_actions(&q, state(4, 3), 1e-9), vec![3]);
    }

    #[test]
    fn walls_block_moves() {
        assert_eq!(step(state(0, 1), 1).0, state(0, 1));
        assert_eq!(step(state(0, 0), 0).0, state(0, 0));
        assert_eq!(step(state(4, 3), 3), (state(4, 4), 1.0, true));
        assert_eq!(step(state(2, 3), 1), (state(3, 3), -1.0, true));
    }
}
