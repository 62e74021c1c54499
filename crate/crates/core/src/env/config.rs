use serde::{Deserialize, Serialize};

use crate::physics::Vec3;
use crate::world::{Difficulty, MapRegions, PayloadClass, Rect, SensorSpec};

/// Coefficients of the shaped reward. Every term can be switched off by
/// setting its weight to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    /// Per metre of progress of the transported point towards the goal.
    pub progress: f64,
    /// Per radian of payload tilt.
    pub tilt: f64,
    /// Per unit of squared action norm.
    pub effort: f64,
    /// Per m/s above the speed limit, summed over bodies.
    pub speed: f64,
    /// Per control step.
    pub time: f64,
    pub success_bonus: f64,
    /// Subtracted on collision or crash.
    pub failure_penalty: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { progress: 10.0, tilt: 0.2, effort: 0.05, speed: 0.5, time: 0.01, success_bonus: 100.0, failure_penalty: 100.0 }
    }
}

impl RewardWeights {
    /// Only the progress term; the undiscounted return then telescopes.
    pub fn progress_only() -> Self {
        Self { progress: 10.0, tilt: 0.0, effort: 0.0, speed: 0.0, time: 0.0, success_bonus: 0.0, failure_penalty: 0.0 }
    }
}

/// Per-episode perturbations of the physical parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationConfig {
    /// When false every draw returns the nominal values.
    pub enabled: bool,
    /// Relative half-width of the per-UAV thrust coefficient draw.
    pub thrust_coeff_frac: f64,
    /// Relative half-width of the per-UAV mass draw.
    pub uav_mass_frac: f64,
    /// Cable rest length interval, m; one length is shared by all cables.
    pub cable_length: [f64; 2],
    /// Upper bound of the uniform horizontal wind speed, m/s; 0 disables wind.
    pub wind_speed_max: f64,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        Self { enabled: true, thrust_coeff_frac: 0.2, uav_mass_frac: 0.1, cable_length: [0.8, 1.2], wind_speed_max: 0.0 }
    }
}

impl RandomizationConfig {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        let frac_ok = |f: f64| (0.0..1.0).contains(&f);
        if !frac_ok(self.thrust_coeff_frac) || !frac_ok(self.uav_mass_frac) {
            return Err("randomization fractions must lie in [0, 1)".into());
        }
        let [lo, hi] = self.cable_length;
        if !(lo > 0.0 && lo <= hi) {
            return Err("randomization.cable_length must be a positive interval [lo, hi]".into());
        }
        if !(self.wind_speed_max >= 0.0) {
            return Err("randomization.wind_speed_max must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// Base seed; episode `k` of a run uses a seed derived from it.
    pub seed: u64,
    pub difficulty: Difficulty,
    /// Without a payload the UAV centroid is the transported point.
    pub payload: bool,
    pub payload_class: PayloadClass,
    pub n_uavs: usize,
    /// Area in which the transported point starts.
    pub start_region: Rect,
    /// Area from which the goal is drawn when `goal` is unset.
    pub goal_region: Rect,
    /// Fixed goal for the transported point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec3>,
    /// Initial height of the transported point, m.
    pub start_height: f64,
    /// Episode length in control steps.
    pub max_steps: usize,
    /// Physics substeps per control step.
    pub substeps: usize,
    pub frame_stack: usize,
    /// Nominal UAV mass, kg.
    pub uav_mass: f64,
    /// Horizontal UAV offset from the payload centre in the start formation, m.
    pub formation_radius: f64,
    /// Speed limit, m/s.
    pub v_max: f64,
    /// Body-rate command limit, rad/s.
    pub omega_max: f64,
    pub success_radius: f64,
    pub success_speed: f64,
    /// Minimum centre distance between two UAVs, m.
    pub min_separation: f64,
    /// Payload roll/pitch beyond which the episode crashes, degrees.
    pub tilt_limit_deg: f64,
    /// Minimum altitude of every body centre, m.
    pub min_altitude: f64,
    /// Rotor-disc radius used for obstacle contact, m.
    pub uav_radius: f64,
    pub sensor: SensorSpec,
    pub reward: RewardWeights,
    pub randomization: RandomizationConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let regions = MapRegions::default();
        Self {
            seed: 0,
            difficulty: Difficulty::Easy,
            payload: true,
            payload_class: PayloadClass::Box,
            n_uavs: 3,
            start_region: regions.start,
            goal_region: regions.goal,
            goal: None,
            start_height: 1.0,
            max_steps: 1200,
            substeps: 5,
            frame_stack: 4,
            uav_mass: 2.0,
            formation_radius: 0.6,
            v_max: 3.4,
            omega_max: 0.57,
            success_radius: 0.5,
            success_speed: 0.5,
            min_separation: 0.3,
            tilt_limit_deg: 60.0,
            min_altitude: 0.05,
            uav_radius: 0.2,
            sensor: SensorSpec::default(),
            reward: RewardWeights::default(),
            randomization: RandomizationConfig::default(),
        }
    }
}

impl EnvConfig {
    /// One UAV, no payload, empty room, goal a short hop ahead at the same
    /// height.
    pub fn simplified() -> Self {
        Self {
            difficulty: Difficulty::Empty,
            payload: false,
            n_uavs: 1,
            start_region: Rect::new(2.0, 3.5, 2.5, 4.5),
            goal_region: Rect::new(4.3, 3.3, 4.8, 4.7),
            start_height: 1.5,
            max_steps: 200,
            ..Self::default()
        }
    }

    pub fn regions(&self) -> MapRegions {
        MapRegions { start: self.start_region, goal: self.goal_region }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_uavs == 0 {
            return Err("env.n_uavs must be at least 1".into());
        }
        if self.max_steps == 0 || self.substeps == 0 || self.frame_stack == 0 {
            return Err("env.max_steps, env.substeps, and env.frame_stack must be positive".into());
        }
        let positive = [
            ("uav_mass", self.uav_mass),
            ("v_max", self.v_max),
            ("omega_max", self.omega_max),
            ("success_radius", self.success_radius),
            ("success_speed", self.success_speed),
            ("start_height", self.start_height),
            ("tilt_limit_deg", self.tilt_limit_deg),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(format!("env.{name} must be positive"));
        }
        if !(self.formation_radius >= 0.0 && self.min_separation >= 0.0 && self.uav_radius >= 0.0) {
            return Err("env.formation_radius, env.min_separation, and env.uav_radius must be non-negative".into());
        }
        if let Some(g) = self.goal {
            if !g.is_finite() {
                return Err("env.goal must be finite".into());
            }
        }
        self.sensor.validate()?;
        self.randomization.validate()
    }
}
