//! Static hover equilibrium for a UAV formation carrying a slung payload.
//!
//! UAV positions are held fixed while the payload pose is solved for zero net
//! force and torque (damped Gauss–Newton on a 6-vector). Each UAV then gets
//! the thrust vector that cancels its weight, drag, and cable pull, which fixes
//! its roll/pitch at the requested yaw and its rotor speeds.

use super::dynamics::cable_readings;
use super::forces::drag_force;
use super::math::{Euler, Vec3};
use super::params::PhysicsParams;
use super::state::{CableSpec, PayloadState, SystemState, UavCommand, UavState, ROTORS};
use super::PhysicsError;

#[derive(Clone, Debug, PartialEq)]
pub struct HoverSolution {
    pub state: SystemState,
    pub commands: Vec<UavCommand>,
    /// World-frame thrust vector of every UAV at equilibrium.
    pub thrusts: Vec<Vec3>,
    pub tensions: Vec<f64>,
}

const MAX_ITERS: usize = 200;
const FORCE_TOL: f64 = 1e-11;

fn payload_residual(state: &SystemState, params: &PhysicsParams) -> [f64; 6] {
    let p = state.payload.as_ref().expect("payload present");
    let rot = p.orientation.rotation();
    let mut force = drag_force(Vec3::ZERO, p.position.z, params) + Vec3::new(0.0, 0.0, -params.gravity * p.mass);
    let mut torque = Vec3::ZERO;
    for (reading, cable) in cable_readings(state).iter().zip(&state.cables) {
        let on_payload = reading.axis * (-reading.tension);
        force += on_payload;
        torque += cable.payload_attach.cross(rot.transpose_mul_vec(on_payload));
    }
    [force.x, force.y, force.z, torque.x, torque.y, torque.z]
}

fn with_pose(state: &SystemState, x: &[f64; 6]) -> SystemState {
    let mut s = state.clone();
    let p = s.payload.as_mut().expect("payload present");
    p.position = Vec3::new(x[0], x[1], x[2]);
    p.orientation = Euler::new(x[3], x[4], x[5]);
    s
}

fn norm_inf(r: &[f64; 6]) -> f64 {
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Solves `a · x = b` for a small dense symmetric positive definite system.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for col in 0..6 {
        let pivot = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..6 {
            let f = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let s: f64 = (row + 1..6).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn solve_payload_pose(state: &SystemState, params: &PhysicsParams) -> Result<SystemState, PhysicsError> {
    let p = state.payload.as_ref().expect("payload present");
    let mut x = [
        p.position.x,
        p.position.y,
        p.position.z,
        p.orientation.roll,
        p.orientation.pitch,
        p.orientation.yaw,
    ];
    let mut r = payload_residual(&with_pose(state, &x), params);
    let mut mu = 1e-6;
    for _ in 0..MAX_ITERS {
        if norm_inf(&r) < FORCE_TOL {
            break;
        }
        let h = 1e-7;
        let mut jac = [[0.0; 6]; 6];
        for j in 0..6 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let rp = payload_residual(&with_pose(state, &xp), params);
            let rm = payload_residual(&with_pose(state, &xm), params);
            for i in 0..6 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 6]; 6];
        let mut jtr = [0.0; 6];
        for a in 0..6 {
            for b in 0..6 {
                jtj[a][b] = (0..6).map(|i| jac[i][a] * jac[i][b]).sum();
            }
            jtr[a] = -(0..6).map(|i| jac[i][a] * r[i]).sum::<f64>();
        }
        let scale = (0..6).map(|i| jtj[i][i]).fold(0.0_f64, f64::max).max(1e-12);
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += mu * scale;
            }
            let Some(dx) = solve6(damped, jtr) else {
                mu *= 10.0;
                continue;
            };
            let mut xn = x;
            for i in 0..6 {
                xn[i] += dx[i];
            }
            let rn = payload_residual(&with_pose(state, &xn), params);
            if norm_inf(&rn) < norm_inf(&r) {
                x = xn;
                r = rn;
                mu = (mu * 0.1).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if norm_inf(&r) > 1e-8 {
        return Err(PhysicsError::NoEquilibrium(format!(
            "payload residual {:.3e} after {MAX_ITERS} iterations",
            norm_inf(&r)
        )));
    }
    Ok(with_pose(state, &x))
}

/// Completes a hover equilibrium: UAV positions and yaws in `state` are kept,
/// the payload pose (if any) is solved, velocities are zeroed, and each UAV's
/// roll, pitch, and rotor speeds are set so all accelerations vanish.
pub fn solve_hover(state: &SystemState, params: &PhysicsParams) -> Result<HoverSolution, PhysicsError> {
    state.validate().map_err(PhysicsError::InvalidInput)?;
    let mut s = state.clone();
    for u in &mut s.uavs {
        u.velocity = Vec3::ZERO;
        u.body_rates = Vec3::ZERO;
    }
    if let Some(p) = s.payload.as_mut() {
        p.velocity = Vec3::ZERO;
        p.angular_velocity = Vec3::ZERO;
    }

    let mut thrusts = vec![Vec3::ZERO; s.uavs.len()];
    // UAV-side attachment offsets make the cable geometry depend on UAV
    // attitude, so alternate payload solve and attitude update until settled.
    for _ in 0..20 {
        if s.payload.is_some() {
            s = solve_payload_pose(&s, params)?;
        }
        let readings = cable_readings(&s);
        let mut max_change = 0.0_f64;
        for (i, u) in s.uavs.iter_mut().enumerate() {
            let cable_pull = readings.get(i).map_or(Vec3::ZERO, |c| c.axis * c.tension);
            let required = -(cable_pull
                + drag_force(Vec3::ZERO, u.position.z, params)
                + Vec3::new(0.0, 0.0, -params.gravity * u.mass));
            if required.z <= 0.0 {
                return Err(PhysicsError::NoEquilibrium(format!("uav {i} would need downward thrust")));
            }
            let (sy, cy) = u.attitude.yaw.sin_cos();
            let dir = required / required.norm();
            // express in the yaw-aligned frame, then read off roll and pitch
            let dx = cy * dir.x + sy * dir.y;
            let dy = -sy * dir.x + cy * dir.y;
            let roll = (-dy).asin();
            let pitch = dx.atan2(dir.z);
            max_change = max_change
                .max((roll - u.attitude.roll).abs())
                .max((pitch - u.attitude.pitch).abs());
            u.attitude.roll = roll;
            u.attitude.pitch = pitch;
            let omega = (required.norm() / (ROTORS as f64 * u.thrust_coeff)).sqrt();
            u.rotor_speeds = [omega; ROTORS];
            thrusts[i] = required;
        }
        let attach_moves = s.cables.iter().any(|c| c.uav_attach != Vec3::ZERO);
        if !attach_moves || max_change < 1e-14 {
            break;
        }
    }

    let commands = s
        .uavs
        .iter()
        .map(|u| UavCommand { rotor_speeds: u.rotor_speeds, body_rate_cmd: Vec3::ZERO })
        .collect();
    let tensions = cable_readings(&s).iter().map(|c| c.tension).collect();
    Ok(HoverSolution { state: s, commands, thrusts, tensions })
}

/// Horizontal unit direction used to splay UAV `i` away from the payload.
fn splay_direction(attach: Vec3, i: usize, n: usize) -> Vec3 {
    let planar = Vec3::new(attach.x, attach.y, 0.0);
    planar.normalized().unwrap_or_else(|| {
        let a = std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64;
        Vec3::new(a.cos(), a.sin(), 0.0)
    })
}

/// Builds and solves a hover formation: each UAV sits `radius` metres
/// horizontally from the payload centre along its attachment direction
/// (directly above the attachment point when that point is on the axis), at a
/// height that keeps its cable taut, with yaw `yaw` for every UAV.
pub fn formation_hover(
    payload: PayloadState,
    uavs: Vec<UavState>,
    cables: Vec<CableSpec>,
    radius: f64,
    yaw: f64,
    params: &PhysicsParams,
) -> Result<HoverSolution, PhysicsError> {
    let n = uavs.len();
    if cables.len() != n || n == 0 {
        return Err(PhysicsError::InvalidInput("need one cable per UAV and at least one UAV".into()));
    }
    let centre = payload.position;
    // Rough per-cable tension guess for the initial vertical drop.
    let tension_guess = payload.mass * params.gravity / n as f64;
    let uavs: Vec<UavState> = uavs
        .into_iter()
        .zip(&cables)
        .enumerate()
        .map(|(i, (mut u, c))| {
            let attach = c.payload_attach;
            let on_axis = attach.planar_norm() < 1e-9;
            let horizontal = if on_axis && n == 1 {
                Vec3::ZERO
            } else {
                splay_direction(attach, i, n) * radius
            };
            let offset = (horizontal - Vec3::new(attach.x, attach.y, 0.0)).planar_norm();
            let length = c.rest_length + 1.5 * tension_guess / c.stiffness;
            let drop = (length * length - offset * offset).max(0.01).sqrt();
            u.position = centre + horizontal + Vec3::new(0.0, 0.0, attach.z + drop);
            u.attitude = Euler::new(0.0, 0.0, yaw);
            u
        })
        .collect();
    let state = SystemState { uavs, payload: Some(payload), cables, t: 0.0 };
    solve_hover(&state, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::dynamics::system_derivative;
    use crate::physics::state::PayloadGeometry;

    fn box_payload(n: usize) -> (PayloadState, Vec<CableSpec>) {
        let geometry = PayloadGeometry::Box { lx: 0.4, ly: 0.4, lz: 0.4 };
        let mass = 1.2;
        let payload = PayloadState {
            position: Vec3::new(5.0, 4.0, 1.0),
            velocity: Vec3::ZERO,
            orientation: Euler::LEVEL,
            angular_velocity: Vec3::ZERO,
            mass,
            inertia_diag: geometry.inertia_diag(mass),
            geometry,
        };
        let cables = (0..n)
            .map(|i| {
                let a = std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64;
                CableSpec::with_attach(Vec3::new(0.14 * a.cos(), 0.14 * a.sin(), 0.2))
            })
            .collect();
        (payload, cables)
    }

    fn max_accel(s: &SystemState, cmds: &[UavCommand], params: &PhysicsParams) -> f64 {
        let d = system_derivative(s, cmds, params).unwrap();
        let mut m = 0.0_f64;
        for u in &d.uavs {
            m = m.max(u.acceleration.max_abs()).max(u.euler_rates.max_abs());
        }
        if let Some(p) = d.payload {
            m = m.max(p.acceleration.max_abs()).max(p.angular_acceleration.max_abs());
        }
        m
    }

    #[test]
    fn three_uav_hover_residual() {
        let params = PhysicsParams::default();
        let (payload, cables) = box_payload(3);
        let uavs = vec![UavState::at_rest(Vec3::ZERO, 2.0, 1e-5); 3];
        let sol = formation_hover(payload, uavs, cables, 0.6, 0.0, &params).unwrap();
        assert!(max_accel(&sol.state, &sol.commands, &params) < 1e-9);
        let t0 = sol.tensions[0];
        assert!(t0 > 0.0);
        for t in &sol.tensions {
            assert!((t - t0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_uav_with_centre_attachment() {
        let params = PhysicsParams::default();
        let (payload, _) = box_payload(1);
        let cables = vec![CableSpec::with_attach(Vec3::new(0.0, 0.0, 0.2))];
        let uavs = vec![UavState::at_rest(Vec3::ZERO, 2.0, 1e-5)];
        let sol = formation_hover(payload, uavs, cables, 0.6, 0.3, &params).unwrap();
        assert!(max_accel(&sol.state, &sol.commands, &params) < 1e-9);
        assert!((sol.tensions[0] - 1.2 * 9.81).abs() < 1e-9);
    }

    #[test]
    fn hover_without_payload() {
        let params = PhysicsParams::default();
        let s = SystemState {
            uavs: vec![UavState::at_rest(Vec3::new(1.0, 1.0, 1.0), 1.7, 1.2e-5)],
            payload: None,
            cables: vec![],
            t: 0.0,
        };
        let sol = solve_hover(&s, &params).unwrap();
        assert!(max_accel(&sol.state, &sol.commands, &params) < 1e-12);
    }

    #[test]
    fn hover_in_wind_tilts_into_it() {
        let params = PhysicsParams {
            wind_profile: vec![crate::physics::Band { z_min: 0.0, value: Vec3::new(1.0, 0.0, 0.0) }],
            ..Default::default()
        };
        let (payload, cables) = box_payload(3);
        let uavs = vec![UavState::at_rest(Vec3::ZERO, 2.0, 1e-5); 3];
        let sol = formation_hover(payload, uavs, cables, 0.6, 0.0, &params).unwrap();
        assert!(max_accel(&sol.state, &sol.commands, &params) < 1e-9);
        let sum: Vec3 = sol.thrusts.iter().copied().sum();
        assert!(sum.x < 0.0, "thrust must lean against the wind");
    }
}
