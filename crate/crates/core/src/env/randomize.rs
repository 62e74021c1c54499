use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::EnvConfig;
use super::EnvError;
use crate::physics::{Band, PhysicsParams, Vec3};
use crate::world::{nominal_payload, sample_payload_with, PayloadSample};

/// Physical parameters of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDraw {
    pub payload: Option<PayloadSample>,
    pub thrust_coeffs: Vec<f64>,
    pub uav_masses: Vec<f64>,
    pub cable_length: f64,
    /// Uniform horizontal wind; zero when wind is disabled.
    pub wind: Vec3,
}

impl DomainDraw {
    /// `params` with this draw's wind applied.
    pub fn physics(&self, params: &PhysicsParams) -> PhysicsParams {
        let mut p = params.clone();
        if self.wind != Vec3::ZERO {
            p.wind_profile = vec![Band { z_min: 0.0, value: self.wind }];
        }
        p
    }
}

const RANDOMIZE_STREAM: u64 = 1;

/// Draws the episode parameters for `seed`. With randomization disabled the
/// result is the nominal configuration regardless of the seed.
pub fn randomize(seed: u64, config: &EnvConfig, params: &PhysicsParams) -> Result<DomainDraw, EnvError> {
    let n = config.n_uavs;
    let r = &config.randomization;
    if !r.enabled {
        return Ok(DomainDraw {
            payload: config.payload.then(|| nominal_payload(config.payload_class, n)),
            thrust_coeffs: vec![params.thrust_coeff; n],
            uav_masses: vec![config.uav_mass; n],
            cable_length: crate::physics::CableSpec::DEFAULT_LENGTH,
            wind: Vec3::ZERO,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RANDOMIZE_STREAM);
    let payload = if config.payload { Some(sample_payload_with(config.payload_class, &mut rng, n)?) } else { None };
    let mut spread = |nominal: f64, frac: f64| nominal * (1.0 + frac * rng.random_range(-1.0..=1.0));
    let thrust_coeffs = (0..n).map(|_| spread(params.thrust_coeff, r.thrust_coeff_frac)).collect();
    let uav_masses = (0..n).map(|_| spread(config.uav_mass, r.uav_mass_frac)).collect();
    let [lo, hi] = r.cable_length;
    let cable_length = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let wind = if r.wind_speed_max > 0.0 {
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        let speed = rng.random_range(0.0..=r.wind_speed_max);
        Vec3::new(speed * heading.cos(), speed * heading.sin(), 0.0)
    } else {
        Vec3::ZERO
    };
    Ok(DomainDraw { payload, thrust_coeffs, uav_masses, cable_length, wind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::RandomizationConfig;

    #[test]
    fn disabled_gives_nominal() {
        let cfg = EnvConfig { randomization: RandomizationConfig::disabled(), ..EnvConfig::default() };
        let p = PhysicsParams::default();
        let a = randomize(1, &cfg, &p).unwrap();
        let b = randomize(2, &cfg, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.thrust_coeffs, vec![1e-5; 3]);
        assert_eq!(a.uav_masses, vec![2.0; 3]);
        assert_eq!(a.cable_length, 1.0);
        assert!((a.payload.unwrap().mass - 1.2).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_draw() {
        let cfg = EnvConfig { randomization: RandomizationConfig { wind_speed_max: 0.5, ..Default::default() }, ..EnvConfig::default() };
        let p = PhysicsParams::default();
        assert_eq!(randomize(5, &cfg, &p).unwrap(), randomize(5, &cfg, &p).unwrap());
        assert_ne!(randomize(5, &cfg, &p).unwrap(), randomize(6, &cfg, &p).unwrap());
    }

    #[test]
    fn sweep_stays_in_bounds() {
        let cfg = EnvConfig::default();
        let p = PhysicsParams::default();
        let (lo, hi) = cfg.payload_class.mass_range();
        for seed in 0..1000 {
            let d = randomize(seed, &cfg, &p).unwrap();
            let m = d.payload.unwrap().mass;
            assert!(m >= lo && m <= hi);
            assert!(d.thrust_coeffs.iter().all(|k| (0.8e-5 - 1e-18..=1.2e-5 + 1e-18).contains(k)));
            assert!(d.uav_masses.iter().all(|m| (1.8 - 1e-12..=2.2 + 1e-12).contains(m)));
            assert!((0.8..=1.2).contains(&d.cable_length));
        }
    }
}
