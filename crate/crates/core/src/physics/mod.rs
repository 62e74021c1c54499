//! Rigid-body dynamics of N hexrotors and one payload coupled by
//! tension-only spring-damper cables, integrated with classical RK4.

mod dynamics;
mod forces;
mod hover;
mod math;
mod params;
mod state;

use thiserror::Error;

pub use dynamics::{
    cable_readings, cable_tensions, step_rk4, system_derivative, CableReading, PayloadDerivative,
    StateDerivative, UavDerivative, GIMBAL_LIMIT,
};
pub use forces::{cable_force, cable_tension, drag_force, thrust_magnitude, thrust_world_vector};
pub use hover::{formation_hover, solve_hover, HoverSolution};
pub use math::{wrap_angle, Euler, Mat3, Vec3};
pub use params::{Band, PhysicsParams};
pub use state::{
    CableSpec, PayloadGeometry, PayloadState, SystemState, UavCommand, UavState, ROTORS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultReason {
    NonFinite,
    /// UAV index whose roll or pitch left the valid range.
    UavAttitude(usize),
    PayloadGimbal,
}

impl std::fmt::Display for FaultReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaultReason::NonFinite => write!(f, "non-finite state"),
            FaultReason::UavAttitude(i) => write!(f, "uav {i} attitude out of range"),
            FaultReason::PayloadGimbal => write!(f, "payload pitch beyond gimbal limit"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("time step {0} outside (0, 0.05] s")]
    InvalidTimestep(f64),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("simulation faulted: {reason}")]
    Faulted {
        reason: FaultReason,
        state: Box<SystemState>,
    },
    #[error("no hover equilibrium: {0}")]
    NoEquilibrium(String),
}
