use std::f64::consts::PI;

use super::forces::{cable_tension, drag_force, thrust_magnitude, thrust_world_vector};
use super::math::{wrap_angle, Euler, Vec3};
use super::params::PhysicsParams;
use super::state::{SystemState, UavCommand};
use super::{FaultReason, PhysicsError};

/// Payload pitch beyond this is treated as a crash instead of switching charts.
pub const GIMBAL_LIMIT: f64 = 80.0 * PI / 180.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UavDerivative {
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub euler_rates: Vec3,
    pub rate_acceleration: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayloadDerivative {
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub euler_rates: Vec3,
    pub angular_acceleration: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub uavs: Vec<UavDerivative>,
    pub payload: Option<PayloadDerivative>,
}

impl StateDerivative {
    fn is_finite(&self) -> bool {
        self.uavs.iter().all(|d| {
            d.velocity.is_finite()
                && d.acceleration.is_finite()
                && d.euler_rates.is_finite()
                && d.rate_acceleration.is_finite()
        }) && self.payload.iter().all(|d| {
            d.velocity.is_finite()
                && d.acceleration.is_finite()
                && d.euler_rates.is_finite()
                && d.angular_acceleration.is_finite()
        })
    }
}

/// World-frame attachment points, their velocities, and the resulting
/// tension for every cable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CableReading {
    pub uav_point: Vec3,
    pub payload_point: Vec3,
    pub stretch: f64,
    pub tension: f64,
    /// Unit vector from the UAV attachment towards the payload attachment.
    pub axis: Vec3,
}

/// Evaluates every cable in `state`. Empty when there is no payload.
pub fn cable_readings(state: &SystemState) -> Vec<CableReading> {
    let Some(payload) = &state.payload else {
        return Vec::new();
    };
    let rot_p = payload.orientation.rotation();
    state
        .uavs
        .iter()
        .zip(&state.cables)
        .map(|(uav, cable)| {
            let rot_u = uav.attitude.rotation();
            let r_p = rot_p.mul_vec(cable.payload_attach);
            let r_u = rot_u.mul_vec(cable.uav_attach);
            let payload_point = payload.position + r_p;
            let uav_point = uav.position + r_u;
            let v_p = payload.velocity + rot_p.mul_vec(payload.angular_velocity.cross(cable.payload_attach));
            let v_u = uav.velocity + rot_u.mul_vec(uav.body_rates.cross(cable.uav_attach));
            let delta = payload_point - uav_point;
            let length = delta.norm();
            let axis = delta.normalized().unwrap_or(Vec3::ZERO);
            let separation_rate = (v_p - v_u).dot(axis);
            let tension = if axis == Vec3::ZERO && length - cable.rest_length > 0.0 {
                log::warn!("cable attachment points coincide while stretched; emitting zero force");
                0.0
            } else {
                cable_tension(uav_point, payload_point, separation_rate, cable)
            };
            CableReading {
                uav_point,
                payload_point,
                stretch: length - cable.rest_length,
                tension,
                axis,
            }
        })
        .collect()
}

/// Cable tensions in UAV order, N.
pub fn cable_tensions(state: &SystemState) -> Vec<f64> {
    cable_readings(state).iter().map(|c| c.tension).collect()
}

/// Time derivative of the full system under constant `commands`.
pub fn system_derivative(
    state: &SystemState,
    commands: &[UavCommand],
    params: &PhysicsParams,
) -> Result<StateDerivative, PhysicsError> {
    if commands.len() != state.uavs.len() {
        return Err(PhysicsError::InvalidInput(format!(
            "{} commands for {} UAVs",
            commands.len(),
            state.uavs.len()
        )));
    }
    let gravity = Vec3::new(0.0, 0.0, -params.gravity);
    let cables = cable_readings(state);

    let mut uav_forces: Vec<Vec3> = Vec::with_capacity(state.uavs.len());
    for (uav, cmd) in state.uavs.iter().zip(commands) {
        let thrust = thrust_magnitude(&cmd.rotor_speeds, uav.thrust_coeff)?;
        uav_forces.push(
            thrust_world_vector(uav.attitude, thrust)
                + drag_force(uav.velocity, uav.position.z, params)
                + gravity * uav.mass,
        );
    }

    let payload = match &state.payload {
        Some(p) => {
            let rot_p = p.orientation.rotation();
            let mut force = drag_force(p.velocity, p.position.z, params) + gravity * p.mass;
            let mut torque_body = Vec3::ZERO;
            for ((reading, cable), uav_force) in cables.iter().zip(&state.cables).zip(uav_forces.iter_mut()) {
                let on_uav = reading.axis * reading.tension;
                *uav_force += on_uav;
                force -= on_uav;
                torque_body += cable.payload_attach.cross(rot_p.transpose_mul_vec(-on_uav));
            }
            let w = p.angular_velocity;
            let inertia_w = w.component_mul(p.inertia_diag);
            let angular_acceleration = (torque_body - w.cross(inertia_w)).component_div(p.inertia_diag);
            Some(PayloadDerivative {
                velocity: p.velocity,
                acceleration: force / p.mass,
                euler_rates: p.orientation.rates_from_body(w),
                angular_acceleration,
            })
        }
        None => None,
    };

    let uavs = state
        .uavs
        .iter()
        .zip(commands)
        .zip(uav_forces)
        .map(|((uav, cmd), force)| UavDerivative {
            velocity: uav.velocity,
            acceleration: force / uav.mass,
            euler_rates: uav.attitude.rates_from_body(uav.body_rates),
            rate_acceleration: (cmd.body_rate_cmd - uav.body_rates) / params.rate_time_constant,
        })
        .collect();

    let out = StateDerivative { uavs, payload };
    if !out.is_finite() {
        return Err(PhysicsError::NonFinite("state derivative".into()));
    }
    Ok(out)
}

fn advanced(state: &SystemState, d: &StateDerivative, h: f64) -> SystemState {
    let mut next = state.clone();
    for (u, du) in next.uavs.iter_mut().zip(&d.uavs) {
        u.position += du.velocity * h;
        u.velocity += du.acceleration * h;
        u.attitude = Euler::from_vec(u.attitude.as_vec() + du.euler_rates * h);
        u.body_rates += du.rate_acceleration * h;
    }
    if let (Some(p), Some(dp)) = (next.payload.as_mut(), d.payload.as_ref()) {
        p.position += dp.velocity * h;
        p.velocity += dp.acceleration * h;
        p.orientation = Euler::from_vec(p.orientation.as_vec() + dp.euler_rates * h);
        p.angular_velocity += dp.angular_acceleration * h;
    }
    next.t += h;
    next
}

fn combine(k: [&StateDerivative; 4]) -> StateDerivative {
    let w = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| (a + (b + c) * 2.0 + d) / 6.0;
    let uavs = (0..k[0].uavs.len())
        .map(|i| {
            let [a, b, c, d] = k.map(|s| s.uavs[i]);
            UavDerivative {
                velocity: w(a.velocity, b.velocity, c.velocity, d.velocity),
                acceleration: w(a.acceleration, b.acceleration, c.acceleration, d.acceleration),
                euler_rates: w(a.euler_rates, b.euler_rates, c.euler_rates, d.euler_rates),
                rate_acceleration: w(
                    a.rate_acceleration,
                    b.rate_acceleration,
                    c.rate_acceleration,
                    d.rate_acceleration,
                ),
            }
        })
        .collect();
    let payload = match k.map(|s| s.payload) {
        [Some(a), Some(b), Some(c), Some(d)] => Some(PayloadDerivative {
            velocity: w(a.velocity, b.velocity, c.velocity, d.velocity),
            acceleration: w(a.acceleration, b.acceleration, c.acceleration, d.acceleration),
            euler_rates: w(a.euler_rates, b.euler_rates, c.euler_rates, d.euler_rates),
            angular_acceleration: w(
                a.angular_acceleration,
                b.angular_acceleration,
                c.angular_acceleration,
                d.angular_acceleration,
            ),
        }),
        _ => None,
    };
    StateDerivative { uavs, payload }
}

/// One classical fourth-order Runge–Kutta step of length `dt`.
///
/// Rotor speeds from `commands` are written into the returned state. If the
/// result leaves the valid attitude ranges or goes non-finite the step fails
/// with [`PhysicsError::Faulted`], which carries the offending state.
pub fn step_rk4(
    state: &SystemState,
    commands: &[UavCommand],
    params: &PhysicsParams,
    dt: f64,
) -> Result<SystemState, PhysicsError> {
    if !(dt > 0.0 && dt <= PhysicsParams::MAX_DT) {
        return Err(PhysicsError::InvalidTimestep(dt));
    }
    let k1 = system_derivative(state, commands, params)?;
    let s2 = advanced(state, &k1, dt / 2.0);
    let k2 = system_derivative(&s2, commands, params)?;
    let s3 = advanced(state, &k2, dt / 2.0);
    let k3 = system_derivative(&s3, commands, params)?;
    let s4 = advanced(state, &k3, dt);
    let k4 = system_derivative(&s4, commands, params)?;

    let mut next = advanced(state, &combine([&k1, &k2, &k3, &k4]), dt);
    next.t = state.t + dt;
    for (u, cmd) in next.uavs.iter_mut().zip(commands) {
        u.rotor_speeds = cmd.rotor_speeds;
        u.attitude.yaw = wrap_angle(u.attitude.yaw);
    }
    if let Some(p) = next.payload.as_mut() {
        p.orientation.yaw = wrap_angle(p.orientation.yaw);
    }
    match check_limits(&next) {
        None => Ok(next),
        Some(reason) => Err(PhysicsError::Faulted { reason, state: Box::new(next) }),
    }
}

fn check_limits(state: &SystemState) -> Option<FaultReason> {
    for (i, u) in state.uavs.iter().enumerate() {
        let finite = u.position.is_finite()
            && u.velocity.is_finite()
            && u.attitude.is_finite()
            && u.body_rates.is_finite();
        if !finite {
            return Some(FaultReason::NonFinite);
        }
        if u.attitude.roll.abs() >= PI || u.attitude.pitch.abs() >= GIMBAL_LIMIT {
            return Some(FaultReason::UavAttitude(i));
        }
    }
    if let Some(p) = &state.payload {
        let finite = p.position.is_finite()
            && p.velocity.is_finite()
            && p.orientation.is_finite()
            && p.angular_velocity.is_finite();
        if !finite {
            return Some(FaultReason::NonFinite);
        }
        if p.orientation.pitch.abs() > GIMBAL_LIMIT || p.orientation.roll.abs() >= PI {
            return Some(FaultReason::PayloadGimbal);
        }
    }
    None
}
