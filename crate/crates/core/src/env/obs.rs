use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use super::config::EnvConfig;
use crate::physics::{cable_readings, SystemState, Vec3};
use crate::world::{sense, OccupancyGrid, PayloadClass, SensorSpec, WorldError};

/// Lower and upper bound of every observation entry.
pub const OBS_LOW: f64 = -1.0;
pub const OBS_HIGH: f64 = 1.5;

/// Non-depth features per UAV per frame: velocity 3, body rates 3,
/// attitude 3, cable stretch 1, goal block 4.
const EGO_FEATURES: usize = 14;

/// Partial observation seen by the actor: stacked per-UAV sensor frames,
/// newest frame first.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation(Vec<f64>);

impl Observation {
    /// Wraps raw features, for synthetic inputs in tools and tests.
    pub fn from_features(features: Vec<f64>) -> Self {
        Self(features)
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Full simulator state for the critic. Never handed to the actor.
#[derive(Clone, Debug, PartialEq)]
pub struct PrivilegedState(Vec<f64>);

/// Payload block: position 3, velocity 3, Euler 3, angular velocity 3,
/// mass 1, inertia 3, class one-hot 3.
pub const PAYLOAD_BLOCK: usize = 19;
/// Per UAV: relative position 3, velocity 3, attitude 3, body rates 3,
/// mass 1, thrust-coefficient ratio 1, cable tension 1.
pub const UAV_BLOCK: usize = 15;
const PAYLOAD_MASS_INDEX: usize = 12;

impl PrivilegedState {
    /// Wraps raw features, for synthetic inputs in tools and tests.
    pub fn from_features(features: Vec<f64>) -> Self {
        Self(features)
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    /// Payload mass as stored in the vector; 0 without a payload.
    pub fn payload_mass(&self) -> f64 {
        self.0[PAYLOAD_MASS_INDEX]
    }
}

pub fn features_per_uav(spec: &SensorSpec) -> usize {
    spec.n_rays() + EGO_FEATURES
}

pub fn observation_len(config: &EnvConfig) -> usize {
    config.n_uavs * config.frame_stack * features_per_uav(&config.sensor)
}

pub fn privileged_len(n_uavs: usize) -> usize {
    PAYLOAD_BLOCK + 3 + UAV_BLOCK * n_uavs + 1
}

/// One frame: the concatenated per-UAV features.
pub(crate) fn frame(
    state: &SystemState,
    grid: &OccupancyGrid,
    config: &EnvConfig,
    beacon: Vec3,
) -> Result<Vec<f64>, WorldError> {
    let spec = &config.sensor;
    let cables = cable_readings(state);
    let mut out = Vec::with_capacity(state.uavs.len() * features_per_uav(spec));
    for (i, uav) in state.uavs.iter().enumerate() {
        let reading = sense(state, i, grid, spec, beacon)?;
        out.extend_from_slice(&reading.depth);
        let (s, c) = uav.attitude.yaw.sin_cos();
        let v = uav.velocity;
        let heading_v = Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z);
        out.extend((heading_v / config.v_max).to_array());
        out.extend((uav.body_rates / config.omega_max).to_array());
        out.extend([uav.attitude.roll / PI, uav.attitude.pitch / FRAC_PI_2, uav.attitude.yaw / PI]);
        let stretch = match (cables.get(i), state.cables.get(i)) {
            (Some(r), Some(c)) => r.stretch / (0.1 * c.rest_length),
            _ => 0.0,
        };
        out.push(stretch);
        match reading.goal {
            Some(g) => out.extend([1.0, g.azimuth / spec.half_h(), g.elevation / spec.half_v(), g.range_frac]),
            None => out.extend([-1.0, 0.0, 0.0, 0.0]),
        }
    }
    for x in &mut out {
        *x = if x.is_nan() { 0.0 } else { x.clamp(OBS_LOW, OBS_HIGH) };
    }
    Ok(out)
}

/// Fixed-depth history of frames, newest first.
#[derive(Clone, Debug)]
pub(crate) struct FrameStack {
    frames: VecDeque<Vec<f64>>,
    depth: usize,
}

impl FrameStack {
    /// A stack filled with copies of `first`.
    pub fn filled(first: Vec<f64>, depth: usize) -> Self {
        Self { frames: std::iter::repeat_n(first, depth).collect(), depth }
    }

    pub fn push(&mut self, frame: Vec<f64>) {
        self.frames.push_front(frame);
        self.frames.truncate(self.depth);
    }

    pub fn observation(&self) -> Observation {
        Observation(self.frames.iter().flatten().copied().collect())
    }
}

pub(crate) fn privileged(
    state: &SystemState,
    class: Option<PayloadClass>,
    goal: Vec3,
    nominal_thrust_coeff: f64,
    time_frac: f64,
) -> PrivilegedState {
    let mut v = Vec::with_capacity(privileged_len(state.uavs.len()));
    match &state.payload {
        Some(p) => {
            v.extend(p.position.to_array());
            v.extend(p.velocity.to_array());
            v.extend(p.orientation.as_vec().to_array());
            v.extend(p.angular_velocity.to_array());
            v.push(p.mass);
            v.extend(p.inertia_diag.to_array());
            let mut one_hot = [0.0; 3];
            if let Some(c) = class {
                one_hot[c.index()] = 1.0;
            }
            v.extend(one_hot);
        }
        None => v.extend([0.0; PAYLOAD_BLOCK]),
    }
    let anchor = state.transport_point();
    v.extend((goal - anchor).to_array());
    let tensions = crate::physics::cable_tensions(state);
    for (i, u) in state.uavs.iter().enumerate() {
        v.extend((u.position - anchor).to_array());
        v.extend(u.velocity.to_array());
        v.extend(u.attitude.as_vec().to_array());
        v.extend(u.body_rates.to_array());
        v.push(u.mass);
        v.push(u.thrust_coeff / nominal_thrust_coeff);
        v.push(tensions.get(i).copied().unwrap_or(0.0));
    }
    v.push(time_frac);
    PrivilegedState(v)
}
