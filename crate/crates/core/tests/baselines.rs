use hexlift::baselines::gridworld::{self, policy_mismatches, train_gridworld, value_iteration, TabularRule};
use hexlift::baselines::{MacroAction, MacroController, MacroEnv, N_MACROS, N_STATES};
use hexlift::env::{Env, EnvConfig, RandomizationConfig};
use hexlift::physics::PhysicsParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn full_env() -> Env {
    let cfg = EnvConfig { randomization: RandomizationConfig::disabled(), ..EnvConfig::default() };
    let mut env = Env::new(cfg, PhysicsParams::default()).unwrap();
    env.reset_seeded(5).unwrap();
    env
}

#[test]
fn hover_macro_holds_equilibrium() {
    let mut env = full_env();
    let before = env.state().unwrap().clone();
    let mut ctl = MacroController::new();
    let a = ctl.action(MacroAction::Hover, &env).unwrap();
    env.step(&a).unwrap();
    let after = env.state().unwrap();
    let dt = env.control_dt();
    let p0 = before.payload.as_ref().unwrap();
    let p1 = after.payload.as_ref().unwrap();
    let acc = (p1.velocity - p0.velocity).norm() / dt;
    assert!(acc < 1e-2, "payload acceleration {acc}");
    for (u0, u1) in before.uavs.iter().zip(&after.uavs) {
        assert!((u1.velocity - u0.velocity).norm() / dt < 1e-2);
    }
}

#[test]
fn forward_macro_moves_payload_along_heading() {
    let mut env = full_env();
    let heading = hexlift::baselines::formation_heading(env.state().unwrap());
    let mut ctl = MacroController::new();
    let steps = (1.0 / env.control_dt()).round() as usize;
    let mut mean_v = 0.0;
    for _ in 0..steps {
        let a = ctl.action(MacroAction::ForwardFast, &env).unwrap();
        let r = env.step(&a).unwrap();
        assert!(!r.done, "episode ended early: {}", r.reason);
        let v = env.state().unwrap().payload.as_ref().unwrap().velocity;
        mean_v += (v.x * heading.cos() + v.y * heading.sin()) / steps as f64;
    }
    assert!(mean_v > 0.0, "mean forward velocity {mean_v}");
}

#[test]
fn macro_env_reports_consumed_steps_and_valid_states() {
    let cfg = EnvConfig::default();
    let mut m = MacroEnv::new(Env::new(cfg, PhysicsParams::default()).unwrap(), 4).unwrap();
    let (s, _) = m.reset_seeded(11).unwrap();
    assert!(s < N_STATES);
    for a in 0..N_MACROS {
        let st = m.step(a).unwrap();
        assert!(st.state < N_STATES);
        assert!(st.env_steps <= 4 && st.env_steps >= 1);
        if st.done {
            break;
        }
    }
    assert!(m.step(N_MACROS).is_err());
}

#[test]
fn tabular_learners_recover_value_iteration_policy() {
    let oracle = value_iteration();
    for rule in [TabularRule::QLearning, TabularRule::Sarsa] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = train_gridworld(rule, 50_000, 0.1, &mut rng);
        let bad = policy_mismatches(&q, &oracle);
        assert!(bad.is_empty(), "{rule:?} mismatched states {:?}", bad.iter().map(|&s| gridworld::cell(s)).collect::<Vec<_>>());
    }
}
