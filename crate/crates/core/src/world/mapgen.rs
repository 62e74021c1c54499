use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{OccupancyGrid, Rect};
use super::WorldError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    /// Walled room without interior obstacles.
    Empty,
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn obstacle_range(self) -> (usize, usize) {
        match self {
            Difficulty::Empty => (0, 0),
            Difficulty::Easy => (0, 2),
            Difficulty::Medium => (3, 5),
            Difficulty::Hard => (6, 9),
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "empty" => Ok(Difficulty::Empty),
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty `{other}` (expected empty, easy, medium, or hard)")),
        }
    }
}

/// Areas kept free of obstacles and required to be connected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapRegions {
    pub start: Rect,
    pub goal: Rect,
}

impl Default for MapRegions {
    fn default() -> Self {
        Self { start: Rect::new(1.0, 2.5, 3.0, 5.5), goal: Rect::new(11.0, 2.5, 13.0, 5.5) }
    }
}

/// Half-width of the corridor that must connect start and goal, metres.
pub const CORRIDOR_HALF_WIDTH: f64 = 0.75;
const MAX_RESAMPLES: usize = 100;
const MAP_SALT: u64 = 0x6d61_705f_7365_6564;

/// Procedural room with the default start/goal regions.
pub fn sample_map(seed: u64, difficulty: Difficulty) -> Result<OccupancyGrid, WorldError> {
    sample_map_between(seed, difficulty, &MapRegions::default())
}

/// Procedural 14 m × 8 m room: perimeter walls plus a difficulty-dependent
/// number of floor-to-ceiling box obstacles that avoid both regions, resampled
/// until a corridor at least 1.5 m wide links start and goal.
pub fn sample_map_between(seed: u64, difficulty: Difficulty, regions: &MapRegions) -> Result<OccupancyGrid, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ MAP_SALT);
    let (lo, hi) = difficulty.obstacle_range();
    let keep_clear = [regions.start.inflate(CORRIDOR_HALF_WIDTH), regions.goal.inflate(CORRIDOR_HALF_WIDTH)];
    for _ in 0..MAX_RESAMPLES {
        let mut grid = OccupancyGrid::default_room();
        let count = rng.random_range(lo..=hi);
        let mut placed = 0;
        for _ in 0..count * 50 {
            if placed == count {
                break;
            }
            let w = rng.random_range(0.4..1.6);
            let h = rng.random_range(0.4..1.6);
            let x0 = rng.random_range(0.2..grid.width() - 0.2 - w);
            let y0 = rng.random_range(0.2..grid.depth() - 0.2 - h);
            let rect = Rect::new(x0, y0, x0 + w, y0 + h);
            if keep_clear.iter().any(|k| k.intersects(&rect)) {
                continue;
            }
            grid.fill_rect(&rect);
            placed += 1;
        }
        if placed == count && corridor_exists(&grid, regions, CORRIDOR_HALF_WIDTH) {
            return Ok(grid);
        }
    }
    Err(WorldError::Generation(format!(
        "no connected {difficulty:?} map after {MAX_RESAMPLES} attempts (seed {seed})"
    )))
}

/// Cells whose centre is within `clearance` of an occupied cell centre.
fn blocked_by_clearance(grid: &OccupancyGrid, clearance: f64) -> Vec<bool> {
    let (nx, ny) = grid.dims();
    let res = grid.resolution();
    let reach = (clearance / res).ceil() as isize;
    let mut blocked = vec![false; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            if !grid.cell(ix, iy) {
                continue;
            }
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let (jx, jy) = (ix as isize + dx, iy as isize + dy);
                    if jx < 0 || jy < 0 || jx >= nx as isize || jy >= ny as isize {
                        continue;
                    }
                    if ((dx * dx + dy * dy) as f64).sqrt() * res < clearance {
                        blocked[jy as usize * nx + jx as usize] = true;
                    }
                }
            }
        }
    }
    blocked
}

/// Breadth-first search over cells with at least `clearance` to every
/// obstacle, from any such cell in the start region to any in the goal region.
pub fn corridor_exists(grid: &OccupancyGrid, regions: &MapRegions, clearance: f64) -> bool {
    let (nx, ny) = grid.dims();
    let res = grid.resolution();
    let blocked = blocked_by_clearance(grid, clearance);
    let centre = |ix: usize, iy: usize| ((ix as f64 + 0.5) * res, (iy as f64 + 0.5) * res);
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let (x, y) = centre(ix, iy);
            if regions.start.contains(x, y) && !blocked[iy * nx + ix] {
                seen[iy * nx + ix] = true;
                queue.push_back((ix, iy));
            }
        }
    }
    while let Some((ix, iy)) = queue.pop_front() {
        let (x, y) = centre(ix, iy);
        if regions.goal.contains(x, y) {
            return true;
        }
        let neighbours = [
            (ix.wrapping_sub(1), iy),
            (ix + 1, iy),
            (ix, iy.wrapping_sub(1)),
            (ix, iy + 1),
        ];
        for (jx, jy) in neighbours {
            if jx >= nx || jy >= ny {
                continue;
            }
            let k = jy * nx + jx;
            if !seen[k] && !blocked[k] {
                seen[k] = true;
                queue.push_back((jx, jy));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn easy_maps_are_connected() {
        for seed in 0..10 {
            let g = sample_map(seed, Difficulty::Easy).unwrap();
            assert!(corridor_exists(&g, &MapRegions::default(), CORRIDOR_HALF_WIDTH));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(sample_map(42, Difficulty::Medium).unwrap(), sample_map(42, Difficulty::Medium).unwrap());
        assert_ne!(sample_map(1, Difficulty::Hard).unwrap(), sample_map(2, Difficulty::Hard).unwrap());
    }

    #[test]
    fn blocking_wall_has_no_corridor() {
        let mut g = OccupancyGrid::default_room();
        g.fill_rect(&Rect::new(7.0, 0.0, 7.3, 8.0));
        assert!(!corridor_exists(&g, &MapRegions::default(), CORRIDOR_HALF_WIDTH));
        // a 1.0 m gap is too narrow for the 1.5 m corridor, a 2 m gap is fine
        let mut narrow = OccupancyGrid::default_room();
        narrow.fill_rect(&Rect::new(7.0, 0.0, 7.3, 3.5));
        narrow.fill_rect(&Rect::new(7.0, 4.5, 7.3, 8.0));
        assert!(!corridor_exists(&narrow, &MapRegions::default(), CORRIDOR_HALF_WIDTH));
        let mut wide = OccupancyGrid::default_room();
        wide.fill_rect(&Rect::new(7.0, 0.0, 7.3, 3.0));
        wide.fill_rect(&Rect::new(7.0, 5.0, 7.3, 8.0));
        assert!(corridor_exists(&wide, &MapRegions::default(), CORRIDOR_HALF_WIDTH));
    }

    #[test]
    fn obstacle_counts_respect_difficulty() {
        let interior = |g: &OccupancyGrid| {
            let (nx, ny) = g.dims();
            (1..ny - 1).flat_map(|iy| (1..nx - 1).map(move |ix| (ix, iy))).filter(|&(ix, iy)| g.cell(ix, iy)).count()
        };
        assert_eq!(interior(&sample_map(3, Difficulty::Empty).unwrap()), 0);
        assert!(interior(&sample_map(3, Difficulty::Hard).unwrap()) > 0);
    }
}
