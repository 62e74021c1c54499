use serde::{Deserialize, Serialize};

use super::grid::OccupancyGrid;
use super::WorldError;
use crate::physics::{wrap_angle, SystemState, Vec3};

/// Forward-looking depth sensor, gimbal-stabilized: the ray fan follows the
/// UAV yaw but not its roll or pitch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSpec {
    /// Full horizontal field of view, degrees.
    pub h_fov_deg: f64,
    /// Full vertical field of view, degrees.
    pub v_fov_deg: f64,
    pub max_range: f64,
    pub n_rays_h: usize,
    pub n_rays_v: usize,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self { h_fov_deg: 50.0, v_fov_deg: 50.0, max_range: 3.0, n_rays_h: 9, n_rays_v: 5 }
    }
}

impl SensorSpec {
    pub fn validate(&self) -> Result<(), String> {
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if !fov_ok(self.h_fov_deg) || !fov_ok(self.v_fov_deg) {
            return Err("sensor fields of view must lie in (0, 180) degrees".into());
        }
        if !(self.max_range > 0.0) {
            return Err("sensor.max_range must be positive".into());
        }
        if self.n_rays_h == 0 || self.n_rays_v == 0 {
            return Err("sensor needs at least one ray per axis".into());
        }
        Ok(())
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays_h * self.n_rays_v
    }

    pub fn half_h(&self) -> f64 {
        self.h_fov_deg.to_radians() / 2.0
    }

    pub fn half_v(&self) -> f64 {
        self.v_fov_deg.to_radians() / 2.0
    }

    /// Ray angles spread evenly across the field of view, edges included.
    fn fan(n: usize, half: f64) -> impl Iterator<Item = f64> {
        (0..n).map(move |k| if n == 1 { 0.0 } else { -half + 2.0 * half * k as f64 / (n - 1) as f64 })
    }

    /// Unit ray directions for a sensor facing `yaw`, elevation-major order.
    pub fn ray_directions(&self, yaw: f64) -> Vec<Vec3> {
        let mut dirs = Vec::with_capacity(self.n_rays());
        for el in Self::fan(self.n_rays_v, self.half_v()) {
            let (se, ce) = el.sin_cos();
            for az in Self::fan(self.n_rays_h, self.half_h()) {
                let (sa, ca) = (yaw + az).sin_cos();
                dirs.push(Vec3::new(ce * ca, ce * sa, se));
            }
        }
        dirs
    }
}

/// Goal direction relative to the sensor boresight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalBearing {
    pub azimuth: f64,
    pub elevation: f64,
    /// Range divided by the sensor's maximum range.
    pub range_frac: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorReading {
    /// Depth per ray divided by max range, in [0, 1].
    pub depth: Vec<f64>,
    /// `None` when the goal is out of range or outside the field of view.
    pub goal: Option<GoalBearing>,
}

impl SensorReading {
    pub fn nearest(&self) -> f64 {
        self.depth.iter().copied().fold(1.0, f64::min)
    }
}

/// Goal bearing as seen from `origin` facing `yaw`, if it is within range and
/// inside the field of view.
pub fn goal_bearing(origin: Vec3, yaw: f64, goal: Vec3, spec: &SensorSpec) -> Option<GoalBearing> {
    let rel = goal - origin;
    let range = rel.norm();
    if range > spec.max_range {
        return None;
    }
    let azimuth = if rel.planar_norm() > 0.0 { wrap_angle(rel.y.atan2(rel.x) - yaw) } else { 0.0 };
    let elevation = rel.z.atan2(rel.planar_norm());
    if azimuth.abs() > spec.half_h() || elevation.abs() > spec.half_v() {
        return None;
    }
    Some(GoalBearing { azimuth, elevation, range_frac: range / spec.max_range })
}

/// Depth image and goal bearing for UAV `uav_index`.
pub fn sense(
    state: &SystemState,
    uav_index: usize,
    grid: &OccupancyGrid,
    spec: &SensorSpec,
    goal: Vec3,
) -> Result<SensorReading, WorldError> {
    let uav = state.uavs.get(uav_index).ok_or_else(|| {
        WorldError::InvalidInput(format!("uav index {uav_index} out of range for {} UAVs", state.uavs.len()))
    })?;
    let yaw = uav.attitude.yaw;
    let depth = spec
        .ray_directions(yaw)
        .into_iter()
        .map(|dir| grid.raycast(uav.position, dir, spec.max_range).map(|d| (d / spec.max_range).clamp(0.0, 1.0)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SensorReading { depth, goal: goal_bearing(uav.position, yaw, goal, spec) })
}
