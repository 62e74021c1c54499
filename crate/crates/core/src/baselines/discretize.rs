use std::f64::consts::FRAC_PI_4;

use super::BaselineError;
use crate::env::{Env, ACTION_PER_UAV};
use crate::physics::{wrap_angle, SystemState, Vec3};
use crate::world::OccupancyGrid;

pub const BEARING_BINS: usize = 8;
pub const RANGE_EDGES: [f64; 4] = [0.5, 1.5, 3.0, 6.0];
pub const OBSTACLE_EDGES: [f64; 3] = [0.5, 1.0, 2.0];
pub const TILT_EDGES_DEG: [f64; 2] = [10.0, 25.0];
pub const SPEED_EDGES: [f64; 2] = [0.3, 1.0];
/// 8 · 5 · 4 · 3 · 3.
pub const N_STATES: usize = BEARING_BINS
    * (RANGE_EDGES.len() + 1)
    * (OBSTACLE_EDGES.len() + 1)
    * (TILT_EDGES_DEG.len() + 1)
    * (SPEED_EDGES.len() + 1);
/// Horizontal probe range for the obstacle feature, metres.
const OBSTACLE_PROBE: f64 = 3.0;

fn bin(x: f64, edges: &[f64]) -> usize {
    edges.iter().take_while(|&&e| x >= e).count()
}

/// Bin indices of one discretized state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateBins {
    pub bearing: usize,
    pub range: usize,
    pub obstacle: usize,
    pub tilt: usize,
    pub speed: usize,
}

impl StateBins {
    pub fn index(self) -> usize {
        let i = self.bearing;
        let i = i * (RANGE_EDGES.len() + 1) + self.range;
        let i = i * (OBSTACLE_EDGES.len() + 1) + self.obstacle;
        let i = i * (TILT_EDGES_DEG.len() + 1) + self.tilt;
        i * (SPEED_EDGES.len() + 1) + self.speed
    }
}

/// Heading of the formation: the yaw of the first UAV.
pub fn formation_heading(state: &SystemState) -> f64 {
    state.uavs.first().map_or(0.0, |u| u.attitude.yaw)
}

/// Tilt of the transported body: the payload's, or the largest UAV tilt
/// without a payload.
fn transport_tilt(state: &SystemState) -> f64 {
    let tilt = |roll: f64, pitch: f64| (roll.cos() * pitch.cos()).clamp(-1.0, 1.0).acos();
    match &state.payload {
        Some(p) => tilt(p.orientation.roll, p.orientation.pitch),
        None => state.uavs.iter().map(|u| tilt(u.attitude.roll, u.attitude.pitch)).fold(0.0, f64::max),
    }
}

/// Shortest horizontal distance from any UAV to an obstacle, probed along
/// eight directions.
fn nearest_obstacle(state: &SystemState, grid: &OccupancyGrid) -> Result<f64, BaselineError> {
    let mut best = OBSTACLE_PROBE;
    for u in &state.uavs {
        for k in 0..8 {
            let a = k as f64 * FRAC_PI_4;
            let d = grid.raycast(u.position, Vec3::new(a.cos(), a.sin(), 0.0), OBSTACLE_PROBE)?;
            best = best.min(d);
        }
    }
    Ok(best)
}

/// Bins of the transport-point state: planar goal bearing relative to the
/// formation heading, goal range, nearest obstacle, tilt, and speed.
pub fn state_bins(state: &SystemState, grid: &OccupancyGrid, goal: Vec3) -> Result<StateBins, BaselineError> {
    let p = state.transport_point();
    let rel = goal - p;
    let bearing = wrap_angle(rel.y.atan2(rel.x) - formation_heading(state));
    // Bin 0 is centred straight ahead; bins advance counter-clockwise.
    let bearing_bin = if bearing.is_finite() {
        ((bearing / FRAC_PI_4).round() as i64).rem_euclid(BEARING_BINS as i64) as usize
    } else {
        0
    };
    let clean = |x: f64| if x.is_finite() { x } else { f64::INFINITY };
    Ok(StateBins {
        bearing: bearing_bin,
        range: bin(clean(rel.planar_norm()), &RANGE_EDGES),
        obstacle: bin(nearest_obstacle(state, grid)?, &OBSTACLE_EDGES),
        tilt: bin(clean(transport_tilt(state).to_degrees()), &TILT_EDGES_DEG),
        speed: bin(clean(state.transport_velocity().norm()), &SPEED_EDGES),
    })
}

/// Maps the current environment state to one of [`N_STATES`] indices.
pub fn discretize(env: &Env) -> Result<usize, BaselineError> {
    let state = env.state().ok_or_else(|| BaselineError::Protocol("environment not reset".into()))?;
    Ok(state_bins(state, env.grid(), env.goal())?.index())
}

/// Centralized macro-actions shared by every UAV.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacroAction {
    Hover,
    ForwardSlow,
    ForwardFast,
    BackSlow,
    BackFast,
    Left,
    Right,
    Up,
    Down,
    RotateLeft,
    RotateRight,
}

pub const N_MACROS: usize = 11;
const SLOW: f64 = 0.3;
const FAST: f64 = 0.8;
const CLIMB: f64 = 0.3;
const YAW_RATE: f64 = 0.4;

impl MacroAction {
    pub const ALL: [MacroAction; N_MACROS] = [
        MacroAction::Hover,
        MacroAction::ForwardSlow,
        MacroAction::ForwardFast,
        MacroAction::BackSlow,
        MacroAction::BackFast,
        MacroAction::Left,
        MacroAction::Right,
        MacroAction::Up,
        MacroAction::Down,
        MacroAction::RotateLeft,
        MacroAction::RotateRight,
    ];

    pub fn from_id(id: usize) -> Result<Self, BaselineError> {
        Self::ALL
            .get(id)
            .copied()
            .ok_or_else(|| BaselineError::Index(format!("macro-action {id} out of range 0..{N_MACROS}")))
    }

    pub fn id(self) -> usize {
        self as usize
    }

    /// Heading-frame velocity setpoint (forward, left, up) and yaw rate.
    pub fn setpoint(self) -> (Vec3, f64) {
        use MacroAction::*;
        match self {
            Hover => (Vec3::ZERO, 0.0),
            ForwardSlow => (Vec3::new(SLOW, 0.0, 0.0), 0.0),
            ForwardFast => (Vec3::new(FAST, 0.0, 0.0), 0.0),
            BackSlow => (Vec3::new(-SLOW, 0.0, 0.0), 0.0),
            BackFast => (Vec3::new(-FAST, 0.0, 0.0), 0.0),
            Left => (Vec3::new(0.0, SLOW, 0.0), 0.0),
            Right => (Vec3::new(0.0, -SLOW, 0.0), 0.0),
            Up => (Vec3::new(0.0, 0.0, CLIMB), 0.0),
            Down => (Vec3::new(0.0, 0.0, -CLIMB), 0.0),
            RotateLeft => (Vec3::ZERO, YAW_RATE),
            RotateRight => (Vec3::ZERO, -YAW_RATE),
        }
    }
}

const KP: f64 = 1.2;
const KI: f64 = 0.3;
const K_ATT: f64 = 3.0;
const MAX_HORIZONTAL_ACCEL: f64 = 2.5;
const MAX_VERTICAL_ACCEL: f64 = 2.0;
const INTEGRAL_LIMIT: f64 = 2.0;

/// PI velocity controller on the transport point. Feed-forward comes from
/// the episode's equilibrium thrusts; the action mapping assumes nominal
/// UAV mass and thrust coefficient, as for every learner.
#[derive(Clone, Debug, Default)]
pub struct MacroController {
    integral: Vec3,
}

impl MacroController {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.integral = Vec3::ZERO;
    }

    /// Environment action (N × 4 values in [−1, 1]) realizing `macro_action`
    /// for one control step.
    pub fn action(&mut self, macro_action: MacroAction, env: &Env) -> Result<Vec<f64>, BaselineError> {
        let (state, hover) = match (env.state(), env.initial_hover()) {
            (Some(s), Some(h)) => (s, h),
            _ => return Err(BaselineError::Protocol("environment not reset".into())),
        };
        let cfg = env.config();
        let g = env.params().gravity;
        let dt = env.control_dt();
        let (v_heading, yaw_rate) = macro_action.setpoint();
        let heading = formation_heading(state);
        let (s, c) = heading.sin_cos();
        let v_ref = Vec3::new(c * v_heading.x - s * v_heading.y, s * v_heading.x + c * v_heading.y, v_heading.z);
        let v = state.transport_velocity();
        let err = if v.is_finite() { v_ref - v } else { Vec3::ZERO };
        let i = self.integral + err * dt;
        self.integral = Vec3::new(
            i.x.clamp(-INTEGRAL_LIMIT, INTEGRAL_LIMIT),
            i.y.clamp(-INTEGRAL_LIMIT, INTEGRAL_LIMIT),
            i.z.clamp(-INTEGRAL_LIMIT, INTEGRAL_LIMIT),
        );
        let mut acc = err * KP + self.integral * KI;
        let horizontal = acc.planar_norm();
        if horizontal > MAX_HORIZONTAL_ACCEL {
            let k = MAX_HORIZONTAL_ACCEL / horizontal;
            acc.x *= k;
            acc.y *= k;
        }
        acc.z = acc.z.clamp(-MAX_VERTICAL_ACCEL, MAX_VERTICAL_ACCEL);

        let hover_thrust = cfg.uav_mass * g;
        let mut out = Vec::with_capacity(state.uavs.len() * ACTION_PER_UAV);
        for (i, uav) in state.uavs.iter().enumerate() {
            let f_eq = hover.thrusts.get(i).copied().unwrap_or(Vec3::new(0.0, 0.0, hover_thrust));
            let share = f_eq.z / g;
            let f = f_eq + acc * share;
            let (sy, cy) = uav.attitude.yaw.sin_cos();
            let d = f / f.norm().max(1e-9);
            let d_heading = Vec3::new(cy * d.x + sy * d.y, -sy * d.x + cy * d.y, d.z);
            let roll_ref = (-d_heading.y).clamp(-1.0, 1.0).asin();
            let pitch_ref = d_heading.x.atan2(d_heading.z);
            let rates = Vec3::new(
                K_ATT * (roll_ref - uav.attitude.roll),
                K_ATT * (pitch_ref - uav.attitude.pitch),
                yaw_rate,
            );
            let thrust_u = f.norm() / hover_thrust - 1.0;
            out.push(thrust_u);
            out.extend((rates / cfg.omega_max).to_array());
        }
        for a in &mut out {
            *a = if a.is_finite() { a.clamp(-1.0, 1.0) } else { 0.0 };
        }
        Ok(out)
    }
}
