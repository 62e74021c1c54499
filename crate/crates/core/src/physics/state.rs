use serde::{Deserialize, Serialize};

use super::math::{Euler, Vec3};

pub const ROTORS: usize = 6;

/// One hexrotor. `mass` and `thrust_coeff` are per-vehicle parameters kept
/// alongside the kinematic state so domain randomization can perturb them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Euler,
    pub body_rates: Vec3,
    pub rotor_speeds: [f64; ROTORS],
    pub mass: f64,
    pub thrust_coeff: f64,
}

impl UavState {
    pub fn at_rest(position: Vec3, mass: f64, thrust_coeff: f64) -> Self {
        Self {
            position,
            velocity: Vec3::ZERO,
            attitude: Euler::LEVEL,
            body_rates: Vec3::ZERO,
            rotor_speeds: [0.0; ROTORS],
            mass,
            thrust_coeff,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PayloadGeometry {
    /// Solid cylinder with its axis along body x.
    Cylinder { length: f64, diameter: f64 },
    Box { lx: f64, ly: f64, lz: f64 },
    /// Solid upright cylinder (axis along body z).
    Bucket { radius: f64, height: f64 },
}

impl PayloadGeometry {
    pub fn dims_positive(&self) -> bool {
        match *self {
            PayloadGeometry::Cylinder { length, diameter } => length > 0.0 && diameter > 0.0,
            PayloadGeometry::Box { lx, ly, lz } => lx > 0.0 && ly > 0.0 && lz > 0.0,
            PayloadGeometry::Bucket { radius, height } => radius > 0.0 && height > 0.0,
        }
    }

    /// Principal moments of inertia for a uniform-density body of mass `m`.
    pub fn inertia_diag(&self, m: f64) -> Vec3 {
        match *self {
            PayloadGeometry::Cylinder { length, diameter } => {
                let r = diameter / 2.0;
                let axial = m * r * r / 2.0;
                let transverse = m * (3.0 * r * r + length * length) / 12.0;
                Vec3::new(axial, transverse, transverse)
            }
            PayloadGeometry::Box { lx, ly, lz } => Vec3::new(
                m * (ly * ly + lz * lz) / 12.0,
                m * (lx * lx + lz * lz) / 12.0,
                m * (lx * lx + ly * ly) / 12.0,
            ),
            PayloadGeometry::Bucket { radius, height } => {
                let transverse = m * (3.0 * radius * radius + height * height) / 12.0;
                Vec3::new(transverse, transverse, m * radius * radius / 2.0)
            }
        }
    }

    /// Height of the top surface above the centre of mass (body z).
    pub fn top_offset(&self) -> f64 {
        match *self {
            PayloadGeometry::Cylinder { diameter, .. } => diameter / 2.0,
            PayloadGeometry::Box { lz, .. } => lz / 2.0,
            PayloadGeometry::Bucket { height, .. } => height / 2.0,
        }
    }

    /// Points on the body surface (body frame) used for contact checks.
    pub fn hull_points(&self) -> Vec<Vec3> {
        match *self {
            PayloadGeometry::Box { lx, ly, lz } => {
                let mut pts = Vec::with_capacity(8);
                for sx in [-0.5, 0.5] {
                    for sy in [-0.5, 0.5] {
                        for sz in [-0.5, 0.5] {
                            pts.push(Vec3::new(sx * lx, sy * ly, sz * lz));
                        }
                    }
                }
                pts
            }
            PayloadGeometry::Bucket { radius, height } => ring_points(radius, height, 8, false),
            PayloadGeometry::Cylinder { length, diameter } => {
                ring_points(diameter / 2.0, length, 8, true)
            }
        }
    }
}

fn ring_points(radius: f64, length: f64, n: usize, along_x: bool) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(2 * n);
    for end in [-0.5, 0.5] {
        for k in 0..n {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            let (s, c) = a.sin_cos();
            pts.push(if along_x {
                Vec3::new(end * length, radius * c, radius * s)
            } else {
                Vec3::new(radius * c, radius * s, end * length)
            });
        }
    }
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayloadState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// (α tilt about x, β, γ) Euler angles.
    pub orientation: Euler,
    /// Body-frame angular velocity.
    pub angular_velocity: Vec3,
    pub mass: f64,
    pub inertia_diag: Vec3,
    pub geometry: PayloadGeometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CableSpec {
    pub rest_length: f64,
    pub stiffness: f64,
    pub damping: f64,
    /// Attachment point in the payload body frame.
    pub payload_attach: Vec3,
    /// Attachment point in the UAV body frame.
    pub uav_attach: Vec3,
}

impl CableSpec {
    pub const DEFAULT_LENGTH: f64 = 1.0;
    pub const DEFAULT_STIFFNESS: f64 = 500.0;
    pub const DEFAULT_DAMPING: f64 = 5.0;

    pub fn with_attach(payload_attach: Vec3) -> Self {
        Self {
            rest_length: Self::DEFAULT_LENGTH,
            stiffness: Self::DEFAULT_STIFFNESS,
            damping: Self::DEFAULT_DAMPING,
            payload_attach,
            uav_attach: Vec3::ZERO,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.rest_length > 0.0
            && self.stiffness > 0.0
            && self.damping >= 0.0
            && self.payload_attach.is_finite()
            && self.uav_attach.is_finite()
    }
}

/// Full physical state. When a payload is present there is exactly one cable
/// per UAV (`cables[i]` connects `uavs[i]`); without a payload `cables` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub uavs: Vec<UavState>,
    pub payload: Option<PayloadState>,
    pub cables: Vec<CableSpec>,
    pub t: f64,
}

impl SystemState {
    /// m = m_p + Σ M_i.
    pub fn total_mass(&self) -> f64 {
        self.uavs.iter().map(|u| u.mass).sum::<f64>()
            + self.payload.as_ref().map_or(0.0, |p| p.mass)
    }

    pub fn linear_momentum(&self) -> Vec3 {
        let uavs: Vec3 = self.uavs.iter().map(|u| u.velocity * u.mass).sum();
        uavs + self
            .payload
            .as_ref()
            .map_or(Vec3::ZERO, |p| p.velocity * p.mass)
    }

    /// Position being transported: payload CoM, or the UAV centroid when no
    /// payload is attached.
    pub fn transport_point(&self) -> Vec3 {
        match &self.payload {
            Some(p) => p.position,
            None => self.uav_centroid(),
        }
    }

    pub fn transport_velocity(&self) -> Vec3 {
        match &self.payload {
            Some(p) => p.velocity,
            None => {
                let n = self.uavs.len().max(1) as f64;
                self.uavs.iter().map(|u| u.velocity).sum::<Vec3>() / n
            }
        }
    }

    pub fn uav_centroid(&self) -> Vec3 {
        let n = self.uavs.len().max(1) as f64;
        self.uavs.iter().map(|u| u.position).sum::<Vec3>() / n
    }

    /// Checks the structural invariants (not the angle limits, which are
    /// enforced after integration).
    pub fn validate(&self) -> Result<(), String> {
        if self.uavs.is_empty() {
            return Err("system needs at least one UAV".into());
        }
        if !(self.t >= 0.0) {
            return Err(format!("negative or NaN time {}", self.t));
        }
        for (i, u) in self.uavs.iter().enumerate() {
            if !(u.mass > 0.0) || !(u.thrust_coeff > 0.0) {
                return Err(format!("uav {i}: mass and thrust coefficient must be positive"));
            }
            if u.rotor_speeds.iter().any(|w| !(*w >= 0.0)) {
                return Err(format!("uav {i}: negative rotor speed"));
            }
        }
        match &self.payload {
            Some(p) => {
                if !(p.mass > 0.0) {
                    return Err("payload mass must be positive".into());
                }
                if !(p.inertia_diag.x > 0.0 && p.inertia_diag.y > 0.0 && p.inertia_diag.z > 0.0) {
                    return Err("payload inertia must be positive".into());
                }
                if !p.geometry.dims_positive() {
                    return Err("payload dimensions must be positive".into());
                }
                if self.cables.len() != self.uavs.len() {
                    return Err(format!(
                        "{} cables for {} UAVs",
                        self.cables.len(),
                        self.uavs.len()
                    ));
                }
                if let Some(i) = self.cables.iter().position(|c| !c.is_valid()) {
                    return Err(format!("cable {i}: invalid parameters"));
                }
            }
            None => {
                if !self.cables.is_empty() {
                    return Err("cables given without a payload".into());
                }
            }
        }
        Ok(())
    }
}

/// Per-UAV actuator input held constant over one integration step.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct UavCommand {
    pub rotor_speeds: [f64; ROTORS],
    /// Body-rate setpoint tracked by the first-order inner loop.
    pub body_rate_cmd: Vec3,
}

impl UavCommand {
    pub fn uniform(rotor_speed: f64, body_rate_cmd: Vec3) -> Self {
        Self {
            rotor_speeds: [rotor_speed; ROTORS],
            body_rate_cmd,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_axial_inertia() {
        let g = PayloadGeometry::Cylinder { length: 1.0, diameter: 0.3 };
        let i = g.inertia_diag(1.0);
        assert!((i.x - 0.01125).abs() < 1e-15);
        assert!((i.y - (3.0 * 0.0225 + 1.0) / 12.0).abs() < 1e-15);
    }

    #[test]
    fn box_inertia_cube() {
        let g = PayloadGeometry::Box { lx: 0.4, ly: 0.4, lz: 0.4 };
        let i = g.inertia_diag(1.2);
        let want = 1.2 * (0.16 + 0.16) / 12.0;
        assert!((i.x - want).abs() < 1e-15 && (i.y - want).abs() < 1e-15 && (i.z - want).abs() < 1e-15);
    }

    #[test]
    fn total_mass_sums_bodies() {
        let uav = UavState::at_rest(Vec3::ZERO, 2.0, 1e-5);
        let state = SystemState {
            uavs: vec![uav.clone(), uav.clone(), uav],
            payload: Some(PayloadState {
                position: Vec3::ZERO,
                velocity: Vec3::ZERO,
                orientation: Euler::LEVEL,
                angular_velocity: Vec3::ZERO,
                mass: 1.5,
                inertia_diag: Vec3::new(0.1, 0.1, 0.1),
                geometry: PayloadGeometry::Box { lx: 0.4, ly: 0.4, lz: 0.4 },
            }),
            cables: vec![CableSpec::with_attach(Vec3::ZERO); 3],
            t: 0.0,
        };
        assert_eq!(state.total_mass(), 7.5);
        assert!(state.validate().is_ok());
    }

    #[test]
    fn validate_rejects_cable_count_mismatch() {
        let uav = UavState::at_rest(Vec3::ZERO, 2.0, 1e-5);
        let state = SystemState {
            uavs: vec![uav],
            payload: None,
            cables: vec![CableSpec::with_attach(Vec3::ZERO)],
            t: 0.0,
        };
        assert!(state.validate().is_err());
    }
}
