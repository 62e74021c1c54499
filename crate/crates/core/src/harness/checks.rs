//! Invariant suites behind `check`: each returns named pass/fail results.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nn::{gradient_check_squared, DenseNet};
use crate::physics::{
    cable_tensions, formation_hover, step_rk4, CableSpec, Euler, HoverSolution, PayloadState, PhysicsError,
    PhysicsParams, SystemState, UavCommand, UavState, Vec3,
};
use crate::rl::compute_gae;
use crate::world::{nominal_payload, PayloadClass};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", if self.passed { "pass" } else { "FAIL" }, self.name, self.detail)
    }
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn failed(name: &'static str, e: impl fmt::Display) -> CheckOutcome {
    outcome(name, false, format!("error: {e}"))
}

/// Equilibrium of `n` UAVs carrying the nominal box at 1.5 m.
pub fn nominal_hover(n: usize, params: &PhysicsParams) -> Result<HoverSolution, PhysicsError> {
    let sample = nominal_payload(PayloadClass::Box, n);
    let payload = PayloadState {
        position: Vec3::new(0.0, 0.0, 1.5),
        velocity: Vec3::ZERO,
        orientation: Euler::LEVEL,
        angular_velocity: Vec3::ZERO,
        mass: sample.mass,
        inertia_diag: sample.inertia_diag,
        geometry: sample.geometry,
    };
    let uavs = vec![UavState::at_rest(Vec3::ZERO, 2.0, params.thrust_coeff); n];
    let cables = sample.attach_points.iter().map(|&a| CableSpec::with_attach(a)).collect();
    formation_hover(payload, uavs, cables, 0.6, 0.0, params)
}

/// Largest payload displacement over `seconds` of hover.
pub fn hover_drift(seconds: f64, params: &PhysicsParams) -> Result<f64, PhysicsError> {
    let sol = nominal_hover(3, params)?;
    let start = sol.state.transport_point();
    let mut s = sol.state.clone();
    let steps = (seconds / params.dt).round() as usize;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        s = step_rk4(&s, &sol.commands, params, params.dt)?;
        worst = worst.max((s.transport_point() - start).norm());
    }
    Ok(worst)
}

fn falling_uav(mass: f64) -> SystemState {
    SystemState {
        uavs: vec![UavState::at_rest(Vec3::new(0.0, 0.0, 100.0), mass, 1e-5)],
        payload: None,
        cables: Vec::new(),
        t: 0.0,
    }
}

fn fall(params: &PhysicsParams, dt: f64, seconds: f64) -> Result<f64, PhysicsError> {
    let mut s = falling_uav(2.0);
    let cmd = [UavCommand::uniform(0.0, Vec3::ZERO)];
    for _ in 0..(seconds / dt).round() as usize {
        s = step_rk4(&s, &cmd, params, dt)?;
    }
    Ok(s.uavs[0].position.z - 100.0)
}

/// |simulated − (−½gt²)| after one second of drag-free fall.
pub fn ballistic_error(params: &PhysicsParams) -> Result<f64, PhysicsError> {
    let p = PhysicsParams { drag_coeff: 0.0, ..params.clone() };
    Ok((fall(&p, p.dt, 1.0)? + 0.5 * p.gravity).abs())
}

/// Error ratio between step sizes `dt` and `dt/2` for a fall with quadratic
/// drag, against the closed form z = −ln(cosh(√(g c) t)) / c.
pub fn rk4_order_ratio(params: &PhysicsParams, dt: f64, seconds: f64) -> Result<f64, PhysicsError> {
    let mass = 2.0;
    let c = 0.5 * params.rho0 * params.drag_coeff * params.ref_area / mass;
    let exact = -((params.gravity * c).sqrt() * seconds).cosh().ln() / c;
    let p = PhysicsParams { density_profile: Vec::new(), wind_profile: Vec::new(), ..params.clone() };
    let coarse = (fall(&p, dt, seconds)? - exact).abs();
    let fine = (fall(&p, dt / 2.0, seconds)? - exact).abs();
    Ok(coarse / fine)
}

/// Random hover perturbation for rollout checks.
pub fn perturbed_rollout<R: Rng>(
    rng: &mut R,
    params: &PhysicsParams,
    seconds: f64,
    mut visit: impl FnMut(&SystemState),
) -> Result<(), PhysicsError> {
    let n = rng.random_range(1..=4);
    let sol = nominal_hover(n, params)?;
    let mut s = sol.state.clone();
    for u in &mut s.uavs {
        u.velocity = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    }
    let cmds: Vec<UavCommand> = sol
        .commands
        .iter()
        .map(|c| UavCommand {
            rotor_speeds: c.rotor_speeds.map(|w| w * rng.random_range(0.97..1.03)),
            body_rate_cmd: Vec3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), rng.random_range(-0.2..0.2)),
        })
        .collect();
    for _ in 0..(seconds / params.dt).round() as usize {
        match step_rk4(&s, &cmds, params, params.dt) {
            Ok(next) => s = next,
            // A rollout that leaves the valid attitude range ends there.
            Err(PhysicsError::Faulted { .. }) => break,
            Err(e) => return Err(e),
        }
        visit(&s);
    }
    Ok(())
}

/// Worst momentum drift rate (kg·m/s per simulated second) of cable-only
/// dynamics: gravity, drag, and thrust all off. A rollout that tumbles the
/// payload past the attitude limit is scored up to that point.
pub fn cable_momentum_drift<R: Rng>(rng: &mut R, seconds: f64) -> Result<f64, PhysicsError> {
    let params = PhysicsParams::default();
    let sol = nominal_hover(3, &params)?;
    let free = PhysicsParams { gravity: 0.0, drag_coeff: 0.0, ..params.clone() };
    let mut s = sol.state.clone();
    for u in &mut s.uavs {
        u.velocity = Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    }
    let cmds = vec![UavCommand::uniform(0.0, Vec3::ZERO); s.uavs.len()];
    let p0 = s.linear_momentum();
    let mut worst = 0.0f64;
    for _ in 0..(seconds / free.dt).round() as usize {
        s = match step_rk4(&s, &cmds, &free, free.dt) {
            Ok(next) => next,
            Err(PhysicsError::Faulted { .. }) => break,
            Err(e) => return Err(e),
        };
        worst = worst.max((s.linear_momentum() - p0).norm() / s.t);
    }
    Ok(worst)
}

pub fn physics_suite() -> Vec<CheckOutcome> {
    let params = PhysicsParams::default();
    let mut out = Vec::new();
    out.push(match hover_drift(10.0, &params) {
        Ok(d) => outcome("hover fixed point", d < 1e-3, format!("payload drift {d:.2e} m over 10 s")),
        Err(e) => failed("hover fixed point", e),
    });
    out.push(match ballistic_error(&params) {
        Ok(e) => outcome("ballistic fall", e < 1e-6, format!("error {e:.2e} m at t = 1 s")),
        Err(e) => failed("ballistic fall", e),
    });
    out.push(match rk4_order_ratio(&params, 0.05, 2.0) {
        Ok(r) => outcome("rk4 order", (8.0..=32.0).contains(&r), format!("halving dt cut the error by {r:.2}")),
        Err(e) => failed("rk4 order", e),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_tension = f64::INFINITY;
    let mut result = Ok(());
    for _ in 0..20 {
        result = perturbed_rollout(&mut rng, &params, 10.0, |s| {
            min_tension = cable_tensions(s).into_iter().fold(min_tension, f64::min);
        });
        if result.is_err() {
            break;
        }
    }
    out.push(match result {
        Ok(()) => outcome("unilateral cables", !(min_tension < 0.0), format!("minimum tension {min_tension:.3e} N")),
        Err(e) => failed("unilateral cables", e),
    });
    out.push(match cable_momentum_drift(&mut rng, 10.0) {
        Ok(d) => outcome("cable momentum", d < 1e-6, format!("drift {d:.2e} kg·m/s per s")),
        Err(e) => failed("cable momentum", e),
    });
    out
}

/// Random dense net no larger than 64-128-64-8.
pub fn random_net<R: Rng>(rng: &mut R) -> Result<DenseNet, crate::nn::NnError> {
    let caps = [64, 128, 64, 8];
    let depth = rng.random_range(1..=3);
    let mut sizes = vec![rng.random_range(1..=caps[0])];
    for l in 1..depth {
        sizes.push(rng.random_range(1..=caps[l]));
    }
    sizes.push(rng.random_range(1..=caps[3]));
    DenseNet::new(&sizes, rng)
}

pub fn gradient_suite() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let net = if k == 0 {
            DenseNet::new(&[64, 128, 64, 8], &mut rng)
        } else {
            random_net(&mut rng)
        };
        let net = match net {
            Ok(n) => n,
            Err(e) => return vec![failed("gradient oracle", e)],
        };
        let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t: Vec<f64> = (0..net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        match gradient_check_squared(&net, &t, &x, 1e-5) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return vec![failed("gradient oracle", e)],
        }
    }
    vec![outcome("gradient oracle", worst < 1e-5, format!("worst relative error {worst:.2e} over 20 nets"))]
}

/// Random episode: rewards, values, and a terminal flag on the last step.
fn random_episode<R: Rng>(rng: &mut R) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let n = rng.random_range(1..60);
    let rewards = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let values = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut dones = vec![false; n];
    dones[n - 1] = true;
    (rewards, values, dones)
}

pub fn gae_suite() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gamma = 0.97;
    let mut mc_err = 0.0f64;
    let mut td_exact = true;
    for _ in 0..100 {
        let (r, v, d) = random_episode(&mut rng);
        let n = r.len();
        let (adv1, _) = match compute_gae(&r, &v, &d, 0.0, gamma, 1.0) {
            Ok(x) => x,
            Err(e) => return vec![failed("gae oracle", e)],
        };
        for t in 0..n {
            let mc: f64 = (t..n).map(|k| gamma.powi((k - t) as i32) * r[k]).sum();
            mc_err = mc_err.max((adv1[t] + v[t] - mc).abs());
        }
        let (adv0, _) = match compute_gae(&r, &v, &d, 0.0, gamma, 0.0) {
            Ok(x) => x,
            Err(e) => return vec![failed("gae oracle", e)],
        };
        for t in 0..n {
            let next = if d[t] { 0.0 } else { v[t + 1] };
            td_exact &= adv0[t] == r[t] + gamma * next - v[t];
        }
    }
    vec![
        outcome("gae λ=1 vs Monte Carlo", mc_err < 1e-10, format!("worst error {mc_err:.2e}")),
        outcome("gae λ=0 vs TD residual", td_exact, format!("bitwise equal: {td_exact}")),
    ]
}
