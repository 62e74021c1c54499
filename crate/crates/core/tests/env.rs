use hexlift::env::{
    observation_len, privileged_len, Env, EnvConfig, EnvError, RandomizationConfig, RewardWeights, TerminationReason,
    OBS_HIGH, OBS_LOW,
};
use hexlift::physics::{system_derivative, PhysicsParams, Vec3};
use hexlift::world::Difficulty;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn env(cfg: EnvConfig) -> Env {
    Env::new(cfg, PhysicsParams::default()).unwrap()
}

#[test]
fn reset_is_deterministic() {
    let mut a = env(EnvConfig { seed: 11, ..EnvConfig::default() });
    let mut b = env(EnvConfig { seed: 11, ..EnvConfig::default() });
    let (oa, pa) = a.reset().unwrap();
    let (ob, pb) = b.reset().unwrap();
    assert_eq!(oa, ob);
    assert_eq!(pa, pb);
    let (oc, _) = a.reset_seeded(12).unwrap();
    assert_ne!(oa, oc);
}

#[test]
fn reset_starts_in_equilibrium() {
    for seed in 0..5 {
        let mut e = env(EnvConfig { seed, ..EnvConfig::default() });
        e.reset().unwrap();
        let s = e.state().unwrap();
        let d = system_derivative(s, e.last_commands(), e.params()).unwrap();
        for u in &d.uavs {
            assert!(u.acceleration.max_abs() < 1e-3);
            assert!(u.velocity.max_abs() == 0.0);
        }
        let p = d.payload.unwrap();
        assert!(p.acceleration.max_abs() < 1e-3);
        assert!(p.angular_acceleration.max_abs() < 1e-3);
    }
}

#[test]
fn initial_observation_has_zero_velocity() {
    let cfg = EnvConfig::default();
    let per_uav = cfg.sensor.n_rays() + 14;
    let mut e = env(cfg.clone());
    let (obs, _) = e.reset().unwrap();
    for u in 0..cfg.n_uavs {
        let base = u * per_uav + cfg.sensor.n_rays();
        assert_eq!(&obs.as_slice()[base..base + 6], &[0.0; 6]);
    }
}

#[test]
fn goal_inside_obstacle_is_rejected() {
    let mut e = env(EnvConfig { goal: Some(Vec3::new(0.05, 4.0, 1.0)), ..EnvConfig::default() });
    assert!(matches!(e.reset(), Err(EnvError::Config(_))));
}

#[test]
fn zero_thrust_falls_and_crashes() {
    let mut e = env(EnvConfig { randomization: RandomizationConfig::disabled(), ..EnvConfig::default() });
    e.reset().unwrap();
    let z0 = e.state().unwrap().payload.as_ref().unwrap().position.z;
    let action = [-1.0, 0.0, 0.0, 0.0].repeat(3);
    let r = e.step(&action).unwrap();
    assert!(e.state().unwrap().payload.as_ref().unwrap().velocity.z < 0.0);
    assert!(!r.done);
    let mut last = r;
    while !last.done {
        last = e.step(&action).unwrap();
    }
    assert!(e.state().unwrap().payload.as_ref().unwrap().position.z < z0);
    assert!(matches!(last.reason, TerminationReason::Crash | TerminationReason::Collision), "{:?}", last.reason);
}

#[test]
fn rate_command_is_scaled_to_limit() {
    let mut e = env(EnvConfig::default());
    e.reset().unwrap();
    e.step(&[0.2, 1.0, -1.0, 1.0].repeat(3)).unwrap();
    for c in e.last_commands() {
        assert_eq!(c.body_rate_cmd, Vec3::new(0.57, -0.57, 0.57));
    }
    e.reset().unwrap();
    e.step(&[0.0, 7.0, -3.0, 0.5].repeat(3)).unwrap();
    assert_eq!(e.last_commands()[0].body_rate_cmd, Vec3::new(0.57, -0.57, 0.285));
}

#[test]
fn done_is_absorbing() {
    let mut e = env(EnvConfig { max_steps: 2, ..EnvConfig::default() });
    e.reset().unwrap();
    let a = vec![0.2; 12];
    assert!(!e.step(&a).unwrap().done);
    let r = e.step(&a).unwrap();
    assert!(r.done);
    assert_eq!(r.reason, TerminationReason::Timeout);
    for _ in 0..3 {
        assert!(matches!(e.step(&a), Err(EnvError::Protocol(_))));
    }
    let mut fresh = env(EnvConfig::default());
    assert!(matches!(fresh.step(&a), Err(EnvError::Protocol(_))));
}

#[test]
fn wrong_action_width_is_an_error() {
    let mut e = env(EnvConfig::default());
    e.reset().unwrap();
    assert!(matches!(e.step(&[0.0; 4]), Err(EnvError::Action(_))));
    assert!(matches!(e.step(&[f64::NAN; 12]), Err(EnvError::Action(_))));
}

#[test]
fn reaching_the_goal_succeeds() {
    // Goal placed at the start point: the payload is already inside the
    // success sphere at rest.
    let probe = {
        let mut e = env(EnvConfig { seed: 3, ..EnvConfig::default() });
        e.reset().unwrap();
        e.state().unwrap().transport_point()
    };
    let mut e = env(EnvConfig { seed: 3, goal: Some(probe), ..EnvConfig::default() });
    e.reset().unwrap();
    let cmds: Vec<f64> = vec![0.0; 12];
    let r = e.step(&cmds).unwrap();
    assert!(r.done);
    assert_eq!(r.reason, TerminationReason::Success);
    assert!(r.reward > 90.0);
}

#[test]
fn progress_only_return_telescopes() {
    let cfg = EnvConfig {
        reward: RewardWeights::progress_only(),
        max_steps: 60,
        difficulty: Difficulty::Empty,
        ..EnvConfig::default()
    };
    let mut e = env(cfg);
    e.reset().unwrap();
    let goal = e.goal();
    let d_start = (e.state().unwrap().transport_point() - goal).norm();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ret = 0.0;
    loop {
        let a: Vec<f64> = (0..12).map(|k| if k % 4 == 0 { 0.2 + rng.random_range(-0.05..0.05) } else { rng.random_range(-0.2..0.2) }).collect();
        let r = e.step(&a).unwrap();
        ret += r.reward;
        if r.done {
            break;
        }
    }
    let d_end = (e.state().unwrap().transport_point() - goal).norm();
    assert!((ret - 10.0 * (d_start - d_end)).abs() < 1e-9, "{ret} vs {}", 10.0 * (d_start - d_end));
}

#[test]
fn randomized_rollouts_respect_contracts() {
    let cfg = EnvConfig { max_steps: 40, ..EnvConfig::default() };
    let obs_len = observation_len(&cfg);
    let priv_len = privileged_len(cfg.n_uavs);
    let mut e = env(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..6 {
        let (o, p) = e.reset_seeded(seed).unwrap();
        assert_eq!(o.len(), obs_len);
        assert_eq!(p.len(), priv_len);
        let mass = e.state().unwrap().payload.as_ref().unwrap().mass;
        assert_eq!(p.payload_mass(), mass);
        loop {
            let a: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
            let r = e.step(&a).unwrap();
            for c in e.last_commands() {
                assert!(c.body_rate_cmd.max_abs() <= 0.57);
            }
            assert_eq!(r.observation.len(), obs_len);
            assert_eq!(r.privileged.len(), priv_len);
            assert!(r.observation.as_slice().iter().all(|x| (OBS_LOW..=OBS_HIGH).contains(x)));
            assert!(r.privileged.as_slice().iter().all(|x| x.is_finite()));
            assert!(r.reward.is_finite());
            assert_eq!(r.done, r.reason != TerminationReason::Running);
            if r.done {
                break;
            }
        }
    }
}

#[test]
fn simplified_task_has_visible_goal() {
    let cfg = EnvConfig::simplified();
    let n_rays = cfg.sensor.n_rays();
    let mut e = env(cfg);
    for seed in 0..10 {
        let (o, p) = e.reset_seeded(seed).unwrap();
        assert_eq!(o.as_slice()[n_rays + 10], 1.0, "goal flag");
        assert_eq!(p.payload_mass(), 0.0);
    }
}

#[test]
fn trace_is_line_delimited_json() {
    let mut e = env(EnvConfig { max_steps: 3, ..EnvConfig::default() });
    e.enable_trace();
    e.reset().unwrap();
    for _ in 0..3 {
        e.step(&[0.2; 12]).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    e.write_trace(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[2]["reason"], "timeout");
}
