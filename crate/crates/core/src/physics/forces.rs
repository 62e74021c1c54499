use super::math::{Euler, Vec3};
use super::params::PhysicsParams;
use super::state::{CableSpec, ROTORS};
use super::PhysicsError;

/// Total rotor thrust T = k_b · Σ ω² over the six rotors.
pub fn thrust_magnitude(rotor_speeds: &[f64; ROTORS], thrust_coeff: f64) -> Result<f64, PhysicsError> {
    if let Some(w) = rotor_speeds.iter().find(|w| !(**w >= 0.0)) {
        return Err(PhysicsError::InvalidInput(format!("rotor speed {w} is negative or NaN")));
    }
    Ok(thrust_coeff * rotor_speeds.iter().map(|w| w * w).sum::<f64>())
}

/// Thrust of magnitude `thrust` along the body z axis, expressed in the world
/// frame.
pub fn thrust_world_vector(attitude: Euler, thrust: f64) -> Vec3 {
    let (sphi, cphi) = attitude.roll.sin_cos();
    let (stheta, ctheta) = attitude.pitch.sin_cos();
    let (spsi, cpsi) = attitude.yaw.sin_cos();
    Vec3::new(
        sphi * spsi + cphi * cpsi * stheta,
        cphi * stheta * spsi - cpsi * sphi,
        ctheta * cphi,
    ) * thrust
}

/// Quadratic drag on a body moving at `velocity` (world frame) at altitude
/// `z`: −½ ρ(z) C_d A |v_rel| v_rel with v_rel = v − V_w(z).
pub fn drag_force(velocity: Vec3, z: f64, params: &PhysicsParams) -> Vec3 {
    let v_rel = velocity - params.wind_at(z);
    let k = 0.5 * params.air_density(z) * params.drag_coeff * params.ref_area;
    v_rel * (-k * v_rel.norm())
}

/// Tension in a unilateral spring-damper cable. `separation_rate` is the rate
/// at which the two attachment points move apart.
pub fn cable_tension(uav_point: Vec3, payload_point: Vec3, separation_rate: f64, cable: &CableSpec) -> f64 {
    let length = (payload_point - uav_point).norm();
    let stretch = length - cable.rest_length;
    if stretch <= 0.0 {
        return 0.0;
    }
    (cable.stiffness * stretch + cable.damping * separation_rate).max(0.0)
}

/// Force the cable exerts on the UAV; the payload receives the negation.
pub fn cable_force(uav_point: Vec3, payload_point: Vec3, separation_rate: f64, cable: &CableSpec) -> Vec3 {
    let tension = cable_tension(uav_point, payload_point, separation_rate, cable);
    if tension == 0.0 {
        return Vec3::ZERO;
    }
    match (payload_point - uav_point).normalized() {
        Some(axis) => axis * tension,
        None => {
            log::warn!("cable attachment points coincide while stretched; emitting zero force");
            Vec3::ZERO
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn thrust_magnitude_examples() {
        assert_eq!(thrust_magnitude(&[0.0; 6], 3.3).unwrap(), 0.0);
        let t = thrust_magnitude(&[500.0; 6], 1e-5).unwrap();
        assert!((t - 15.0).abs() < 1e-12);
        let t = thrust_magnitude(&[100.0, 0.0, 0.0, 0.0, 0.0, 0.0], 2e-5).unwrap();
        assert!((t - 0.2).abs() < 1e-15);
        assert!(thrust_magnitude(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0], 1e-5).is_err());
    }

    #[test]
    fn thrust_direction_examples() {
        let v = thrust_world_vector(Euler::LEVEL, 10.0);
        assert_eq!(v, Vec3::new(0.0, 0.0, 10.0));
        let v = thrust_world_vector(Euler::new(0.0, FRAC_PI_2, 0.0), 1.0);
        assert!((v - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(thrust_world_vector(Euler::new(0.4, -0.2, 1.0), 0.0).norm(), 0.0);
    }

    #[test]
    fn thrust_direction_is_rotation_z_column() {
        let att = Euler::new(0.3, -0.4, 2.0);
        let v = thrust_world_vector(att, 1.0);
        assert!((v - att.rotation().column(2)).norm() < 1e-15);
    }

    #[test]
    fn drag_examples() {
        let p = PhysicsParams { rho0: 1.2, drag_coeff: 1.0, ref_area: 0.1, ..Default::default() };
        assert_eq!(drag_force(Vec3::ZERO, 1.0, &p), Vec3::ZERO);
        let f = drag_force(Vec3::new(2.0, 0.0, 0.0), 1.0, &p);
        assert!((f - Vec3::new(-0.24, 0.0, 0.0)).norm() < 1e-15);

        let windy = PhysicsParams {
            wind_profile: vec![super::super::params::Band { z_min: 0.0, value: Vec3::X }],
            ..p
        };
        assert_eq!(drag_force(Vec3::X, 1.0, &windy), Vec3::ZERO);
    }

    #[test]
    fn cable_examples() {
        let cable = CableSpec { stiffness: 100.0, damping: 0.0, ..CableSpec::with_attach(Vec3::ZERO) };
        let payload = Vec3::new(0.0, 0.0, 0.0);
        // slack
        let uav = Vec3::new(0.0, 0.0, 0.9);
        assert_eq!(cable_force(uav, payload, 0.0, &cable), Vec3::ZERO);
        // stretched by 0.1 along z: 10 N pulling the UAV down
        let uav = Vec3::new(0.0, 0.0, 1.1);
        let f = cable_force(uav, payload, 0.0, &cable);
        assert!((f - Vec3::new(0.0, 0.0, -10.0)).norm() < 1e-9);
        // closing fast enough to cancel the spring term
        let damped = CableSpec { damping: 5.0, ..cable };
        assert_eq!(cable_tension(uav, payload, -3.0, &damped), 0.0);
        assert_eq!(cable_force(uav, payload, -3.0, &damped), Vec3::ZERO);
    }
}
