use serde::{Deserialize, Serialize};

use super::config::EnvConfig;
use crate::physics::{SystemState, Vec3};
use crate::world::OccupancyGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Running,
    Success,
    Collision,
    Crash,
    Timeout,
}

impl TerminationReason {
    pub fn is_done(self) -> bool {
        self != TerminationReason::Running
    }

    pub fn is_failure(self) -> bool {
        matches!(self, TerminationReason::Collision | TerminationReason::Crash)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::Running => "running",
            TerminationReason::Success => "success",
            TerminationReason::Collision => "collision",
            TerminationReason::Crash => "crash",
            TerminationReason::Timeout => "timeout",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Speeds of every UAV followed by the payload's.
fn body_speeds(state: &SystemState) -> impl Iterator<Item = f64> + '_ {
    state.uavs.iter().map(|u| u.velocity.norm()).chain(state.payload.iter().map(|p| p.velocity.norm()))
}

/// Payload tilt α (roll); zero without a payload.
pub fn payload_tilt(state: &SystemState) -> f64 {
    state.payload.as_ref().map_or(0.0, |p| p.orientation.roll)
}

/// Shaped reward for the transition `prev → next` under `action`, with
/// `reason` the termination status of `next`.
pub fn reward(
    prev: &SystemState,
    next: &SystemState,
    action: &[f64],
    goal: Vec3,
    reason: TerminationReason,
    config: &EnvConfig,
) -> f64 {
    let w = &config.reward;
    let d_prev = (prev.transport_point() - goal).norm();
    let d_now = (next.transport_point() - goal).norm();
    let effort: f64 = action.iter().map(|a| a * a).sum();
    let excess: f64 = body_speeds(next).map(|s| (s - config.v_max).max(0.0)).sum();
    let mut r = w.progress * (d_prev - d_now) - w.tilt * payload_tilt(next).abs() - w.effort * effort
        - w.speed * excess
        - w.time;
    match reason {
        TerminationReason::Success => r += w.success_bonus,
        TerminationReason::Collision | TerminationReason::Crash => r -= w.failure_penalty,
        _ => {}
    }
    r
}

/// Horizontal rim points of a UAV's rotor disc plus its centre.
fn uav_contact_points(centre: Vec3, radius: f64) -> impl Iterator<Item = Vec3> {
    std::iter::once(centre).chain((0..8).map(move |k| {
        let a = std::f64::consts::TAU * k as f64 / 8.0;
        centre + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
    }))
}

/// Contact with the map or between UAVs.
pub fn collided(state: &SystemState, grid: &OccupancyGrid, config: &EnvConfig) -> bool {
    for u in &state.uavs {
        if uav_contact_points(u.position, config.uav_radius).any(|p| grid.is_occupied(p)) {
            return true;
        }
    }
    if let Some(p) = &state.payload {
        let rot = p.orientation.rotation();
        if p.geometry.hull_points().into_iter().any(|h| grid.is_occupied(p.position + rot.mul_vec(h))) {
            return true;
        }
    }
    let n = state.uavs.len();
    (0..n).any(|i| {
        (i + 1..n).any(|j| (state.uavs[i].position - state.uavs[j].position).norm() < config.min_separation)
    })
}

/// Loss of control: payload tilted past the limit, a body too low, or a body
/// far beyond the speed limit.
pub fn crashed(state: &SystemState, config: &EnvConfig) -> bool {
    let limit = config.tilt_limit_deg.to_radians();
    if let Some(p) = &state.payload {
        if p.orientation.roll.abs() > limit || p.orientation.pitch.abs() > limit {
            return true;
        }
        if p.position.z < config.min_altitude {
            return true;
        }
    }
    if state.uavs.iter().any(|u| u.position.z < config.min_altitude) {
        return true;
    }
    body_speeds(state).any(|s| !(s <= 1.5 * config.v_max))
}

pub fn succeeded(state: &SystemState, goal: Vec3, config: &EnvConfig) -> bool {
    (state.transport_point() - goal).norm() < config.success_radius
        && state.transport_velocity().norm() < config.success_speed
}

/// Termination status of `state` after `steps` control steps. Failures take
/// precedence over success, and success over timeout.
pub fn terminated(
    state: &SystemState,
    grid: &OccupancyGrid,
    goal: Vec3,
    steps: usize,
    config: &EnvConfig,
) -> TerminationReason {
    if collided(state, grid, config) {
        TerminationReason::Collision
    } else if crashed(state, config) {
        TerminationReason::Crash
    } else if succeeded(state, goal, config) {
        TerminationReason::Success
    } else if steps >= config.max_steps {
        TerminationReason::Timeout
    } else {
        TerminationReason::Running
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{Euler, PayloadGeometry, PayloadState, UavState};

    fn hovering(payload_at: Vec3) -> SystemState {
        let g = PayloadGeometry::Box { lx: 0.4, ly: 0.4, lz: 0.4 };
        let uavs = (0..3)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 3.0;
                UavState::at_rest(payload_at + Vec3::new(0.6 * a.cos(), 0.6 * a.sin(), 1.2), 2.0, 1e-5)
            })
            .collect();
        let payload = PayloadState {
            position: payload_at,
            velocity: Vec3::ZERO,
            orientation: Euler::LEVEL,
            angular_velocity: Vec3::ZERO,
            mass: 1.2,
            inertia_diag: g.inertia_diag(1.2),
            geometry: g,
        };
        let cables = (0..3).map(|_| crate::physics::CableSpec::with_attach(Vec3::new(0.0, 0.0, 0.2))).collect();
        SystemState { uavs, payload: Some(payload), cables, t: 0.0 }
    }

    #[test]
    fn idle_step_costs_time_only() {
        let cfg = EnvConfig::default();
        let s = hovering(Vec3::new(5.0, 4.0, 1.0));
        let r = reward(&s, &s, &[0.0; 12], Vec3::new(12.0, 4.0, 1.0), TerminationReason::Running, &cfg);
        assert_eq!(r, -0.01);
    }

    #[test]
    fn progress_of_a_decimetre() {
        let cfg = EnvConfig::default();
        let prev = hovering(Vec3::new(5.0, 4.0, 1.0));
        let next = hovering(Vec3::new(5.1, 4.0, 1.0));
        let r = reward(&prev, &next, &[0.0; 12], Vec3::new(12.0, 4.0, 1.0), TerminationReason::Running, &cfg);
        assert!((r - 0.99).abs() < 1e-12, "{r}");
        let win = reward(&prev, &next, &[0.0; 12], Vec3::new(12.0, 4.0, 1.0), TerminationReason::Success, &cfg);
        assert!((win - 100.99).abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        let cfg = EnvConfig::default();
        let grid = OccupancyGrid::default_room();
        let goal = Vec3::new(5.0, 4.0, 1.0);
        let mut s = hovering(goal);
        s.payload.as_mut().unwrap().velocity = Vec3::new(0.1, 0.0, 0.0);
        assert_eq!(terminated(&s, &grid, goal, 3, &cfg), TerminationReason::Success);

        let mut close = hovering(Vec3::new(8.0, 4.0, 1.0));
        close.uavs[1].position = close.uavs[0].position + Vec3::new(0.2, 0.0, 0.0);
        assert_eq!(terminated(&close, &grid, goal, 3, &cfg), TerminationReason::Collision);

        let mut tilted = hovering(Vec3::new(8.0, 4.0, 1.0));
        tilted.payload.as_mut().unwrap().orientation.roll = 70f64.to_radians();
        assert_eq!(terminated(&tilted, &grid, goal, 3, &cfg), TerminationReason::Crash);

        let idle = hovering(Vec3::new(8.0, 4.0, 1.0));
        assert_eq!(terminated(&idle, &grid, goal, 3, &cfg), TerminationReason::Running);
        assert_eq!(terminated(&idle, &grid, goal, cfg.max_steps, &cfg), TerminationReason::Timeout);
    }

    #[test]
    fn payload_in_wall_collides() {
        let cfg = EnvConfig::default();
        let grid = OccupancyGrid::default_room();
        let s = hovering(Vec3::new(0.2, 4.0, 1.0));
        assert!(collided(&s, &grid, &cfg));
    }

    #[test]
    fn overspeed_crashes() {
        let cfg = EnvConfig::default();
        let mut s = hovering(Vec3::new(8.0, 4.0, 1.0));
        s.uavs[0].velocity = Vec3::new(5.2, 0.0, 0.0);
        assert!(crashed(&s, &cfg));
        s.uavs[0].velocity = Vec3::new(5.0, 0.0, 0.0);
        assert!(!crashed(&s, &cfg));
    }
}
