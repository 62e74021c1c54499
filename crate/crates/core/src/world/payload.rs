use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::physics::{PayloadGeometry, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadClass {
    Box,
    Package,
    Bucket,
}

impl PayloadClass {
    pub const ALL: [PayloadClass; 3] = [PayloadClass::Box, PayloadClass::Package, PayloadClass::Bucket];

    /// Mass interval, kg.
    pub fn mass_range(self) -> (f64, f64) {
        match self {
            PayloadClass::Box => (0.8, 1.6),
            PayloadClass::Package => (0.5, 1.2),
            PayloadClass::Bucket => (1.0, 2.0),
        }
    }

    pub fn geometry(self) -> PayloadGeometry {
        match self {
            PayloadClass::Box => PayloadGeometry::Box { lx: 0.4, ly: 0.4, lz: 0.4 },
            PayloadClass::Package => PayloadGeometry::Box { lx: 0.6, ly: 0.4, lz: 0.3 },
            PayloadClass::Bucket => PayloadGeometry::Bucket { radius: 0.15, height: 0.3 },
        }
    }

    pub fn index(self) -> usize {
        match self {
            PayloadClass::Box => 0,
            PayloadClass::Package => 1,
            PayloadClass::Bucket => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PayloadClass::Box => "box",
            PayloadClass::Package => "package",
            PayloadClass::Bucket => "bucket",
        }
    }
}

impl std::fmt::Display for PayloadClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PayloadClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "box" => Ok(PayloadClass::Box),
            "package" => Ok(PayloadClass::Package),
            "bucket" => Ok(PayloadClass::Bucket),
            other => Err(format!("unknown payload class `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayloadSample {
    pub class: PayloadClass,
    pub geometry: PayloadGeometry,
    pub mass: f64,
    pub inertia_diag: Vec3,
    /// One attachment point per UAV, payload body frame.
    pub attach_points: Vec<Vec3>,
}

/// Cable attachment points spread symmetrically over the top of the body.
///
/// Boxes and buckets use a ring on the top face/rim starting at −x (so one
/// cable trails the formation); the horizontal cylinder uses evenly spaced
/// points along its top line.
pub fn attach_points(geometry: &PayloadGeometry, n: usize) -> Vec<Vec3> {
    let top = geometry.top_offset();
    match *geometry {
        PayloadGeometry::Cylinder { length, .. } => (0..n)
            .map(|i| Vec3::new(length * ((i as f64 + 0.5) / n as f64 - 0.5), 0.0, top))
            .collect(),
        _ if n == 1 => vec![Vec3::new(0.0, 0.0, top)],
        PayloadGeometry::Box { lx, ly, .. } => ring(0.35 * lx.min(ly), top, n),
        PayloadGeometry::Bucket { radius, .. } => ring(radius, top, n),
    }
}

fn ring(radius: f64, z: f64, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let a = PI + TAU * i as f64 / n as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), z)
        })
        .collect()
}

fn build(class: PayloadClass, mass: f64, n_uavs: usize) -> PayloadSample {
    let geometry = class.geometry();
    PayloadSample {
        class,
        geometry,
        mass,
        inertia_diag: geometry.inertia_diag(mass),
        attach_points: attach_points(&geometry, n_uavs),
    }
}

const PAYLOAD_SALT: u64 = 0x7061_796c_6f61_6421;

/// Payload of `class` with mass drawn uniformly from the class interval.
pub fn sample_payload(class: PayloadClass, seed: u64, n_uavs: usize) -> Result<PayloadSample, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PAYLOAD_SALT);
    sample_payload_with(class, &mut rng, n_uavs)
}

pub fn sample_payload_with<R: Rng>(class: PayloadClass, rng: &mut R, n_uavs: usize) -> Result<PayloadSample, WorldError> {
    if n_uavs == 0 {
        return Err(WorldError::InvalidInput("payload needs at least one UAV".into()));
    }
    let (lo, hi) = class.mass_range();
    Ok(build(class, rng.random_range(lo..=hi), n_uavs))
}

/// Mid-range mass, used when randomization is disabled.
pub fn nominal_payload(class: PayloadClass, n_uavs: usize) -> PayloadSample {
    let (lo, hi) = class.mass_range();
    build(class, (lo + hi) / 2.0, n_uavs.max(1))
}
