use serde::{Deserialize, Serialize};

use super::math::Vec3;

/// A band of a piecewise-constant altitude profile, valid from `z_min` up to
/// the next band's `z_min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band<T> {
    pub z_min: f64,
    pub value: T,
}

fn lookup<T: Copy>(bands: &[Band<T>], z: f64) -> Option<T> {
    let first = bands.first()?;
    // Below the first band clamps to it; otherwise the last band starting at or below z.
    let mut out = first.value;
    for band in bands {
        if band.z_min <= z {
            out = band.value;
        } else {
            break;
        }
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsParams {
    /// m/s²
    pub gravity: f64,
    /// k_b in T = k_b Σ ω², N·s²/rad².
    pub thrust_coeff: f64,
    pub drag_coeff: f64,
    /// Reference area per body, m².
    pub ref_area: f64,
    /// Air density used when no density profile is configured, kg/m³.
    pub rho0: f64,
    pub density_profile: Vec<Band<f64>>,
    pub wind_profile: Vec<Band<Vec3>>,
    /// Integration step, s.
    pub dt: f64,
    /// Time constant of the body-rate tracking loop, s.
    pub rate_time_constant: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            thrust_coeff: 1e-5,
            drag_coeff: 1.0,
            ref_area: 0.1,
            rho0: 1.225,
            density_profile: Vec::new(),
            wind_profile: Vec::new(),
            dt: 0.01,
            rate_time_constant: 0.1,
        }
    }
}

impl PhysicsParams {
    pub const MAX_DT: f64 = 0.05;

    pub fn validate(&self) -> Result<(), String> {
        if !(self.gravity > 0.0) {
            return Err("physics.gravity must be positive".into());
        }
        if !(self.thrust_coeff > 0.0) {
            return Err("physics.thrust_coeff must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt <= Self::MAX_DT) {
            return Err(format!("physics.dt must lie in (0, {}]", Self::MAX_DT));
        }
        if !(self.drag_coeff >= 0.0 && self.ref_area >= 0.0 && self.rho0 > 0.0) {
            return Err("physics drag parameters must be non-negative".into());
        }
        if !(self.rate_time_constant > 0.0) {
            return Err("physics.rate_time_constant must be positive".into());
        }
        let sorted = |zs: Vec<f64>| zs.windows(2).all(|w| w[0] < w[1]);
        if !sorted(self.density_profile.iter().map(|b| b.z_min).collect())
            || !sorted(self.wind_profile.iter().map(|b| b.z_min).collect())
        {
            return Err("profile bands must be sorted by strictly increasing z_min".into());
        }
        if self.density_profile.iter().any(|b| !(b.value > 0.0)) {
            return Err("density profile values must be positive".into());
        }
        Ok(())
    }

    /// ρ(z).
    pub fn air_density(&self, z: f64) -> f64 {
        lookup(&self.density_profile, z).unwrap_or(self.rho0)
    }

    /// V_w(z).
    pub fn wind_at(&self, z: f64) -> Vec3 {
        lookup(&self.wind_profile, z).unwrap_or(Vec3::ZERO)
    }

    /// Gravity and drag switched off, leaving cables as the only forces when
    /// rotors are idle. Not a valid configuration; used for momentum checks.
    pub fn conservative(&self) -> Self {
        Self {
            gravity: 0.0,
            drag_coeff: 0.0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_is_indoor() {
        let p = PhysicsParams::default();
        for z in [-3.0, 0.0, 1.0, 100.0] {
            assert_eq!(p.air_density(z), 1.225);
            assert_eq!(p.wind_at(z), Vec3::ZERO);
        }
    }

    #[test]
    fn wind_bands_lookup_and_clamp() {
        let p = PhysicsParams {
            wind_profile: vec![
                Band { z_min: 0.0, value: Vec3::new(0.5, 0.0, 0.0) },
                Band { z_min: 2.0, value: Vec3::ZERO },
            ],
            ..Default::default()
        };
        assert_eq!(p.wind_at(1.0), Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(p.wind_at(-1.0), Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(p.wind_at(2.0), Vec3::ZERO);
        assert_eq!(p.wind_at(50.0), Vec3::ZERO);
    }

    #[test]
    fn density_bands() {
        let p = PhysicsParams {
            density_profile: vec![Band { z_min: 0.0, value: 1.2 }, Band { z_min: 1.5, value: 1.1 }],
            ..Default::default()
        };
        assert_eq!(p.air_density(0.5), 1.2);
        assert_eq!(p.air_density(1.5), 1.1);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validate_rejects_bad_dt() {
        for dt in [0.0, -0.01, 0.051] {
            let p = PhysicsParams { dt, ..Default::default() };
            assert!(p.validate().is_err());
        }
        assert!(PhysicsParams { dt: 0.05, ..Default::default() }.validate().is_ok());
    }
}
