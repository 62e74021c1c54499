//! Indoor environment: occupancy map, ray-cast depth sensing, procedural
//! rooms, and payload sampling.

mod grid;
mod mapgen;
mod payload;
mod sensor;

use thiserror::Error;

pub use grid::{OccupancyGrid, Rect};
pub use mapgen::{corridor_exists, sample_map, sample_map_between, Difficulty, MapRegions, CORRIDOR_HALF_WIDTH};
pub use payload::{attach_points, nominal_payload, sample_payload, sample_payload_with, PayloadClass, PayloadSample};
pub use sensor::{goal_bearing, sense, GoalBearing, SensorReading, SensorSpec};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("map generation failed: {0}")]
    Generation(String),
    #[error("map parse error: {0}")]
    Parse(String),
}
