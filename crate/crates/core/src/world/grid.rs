use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::physics::Vec3;

/// Axis-aligned rectangle on the floor plan, metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0: x0.min(x1), y0: y0.min(y1), x1: x0.max(x1), y1: y0.max(y1) }
    }

    pub fn around(centre: Vec3, half: f64) -> Self {
        Self::new(centre.x - half, centre.y - half, centre.x + half, centre.y + half)
    }

    pub fn inflate(&self, margin: f64) -> Self {
        Self::new(self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    pub fn centre(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

/// 2-D occupancy map of a room; occupied cells are extruded from floor to
/// ceiling. The boundary ring of cells is always occupied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: f64,
    depth: f64,
    ceiling: f64,
    resolution: f64,
    nx: usize,
    ny: usize,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub const WIDTH: f64 = 14.0;
    pub const DEPTH: f64 = 8.0;
    pub const CEILING: f64 = 3.0;
    pub const RESOLUTION: f64 = 0.1;

    /// Walled room with no interior obstacles.
    pub fn empty(width: f64, depth: f64, ceiling: f64, resolution: f64) -> Result<Self, WorldError> {
        if !(resolution > 0.0 && width > 2.0 * resolution && depth > 2.0 * resolution && ceiling > 0.0) {
            return Err(WorldError::InvalidInput(format!(
                "bad map dimensions {width}x{depth}x{ceiling} at resolution {resolution}"
            )));
        }
        let nx = (width / resolution).round() as usize;
        let ny = (depth / resolution).round() as usize;
        let mut grid = Self { width, depth, ceiling, resolution, nx, ny, cells: vec![false; nx * ny] };
        grid.wall_perimeter();
        Ok(grid)
    }

    /// The default 14 m × 8 m room, 3 m ceiling, 0.1 m cells.
    pub fn default_room() -> Self {
        Self::empty(Self::WIDTH, Self::DEPTH, Self::CEILING, Self::RESOLUTION).expect("valid defaults")
    }

    fn wall_perimeter(&mut self) {
        for ix in 0..self.nx {
            self.set(ix, 0, true);
            self.set(ix, self.ny - 1, true);
        }
        for iy in 0..self.ny {
            self.set(0, iy, true);
            self.set(self.nx - 1, iy, true);
        }
    }

    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn depth(&self) -> f64 {
        self.depth
    }
    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }
    pub fn resolution(&self) -> f64 {
        self.resolution
    }
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell(&self, ix: usize, iy: usize) -> bool {
        self.cells[iy * self.nx + ix]
    }

    fn set(&mut self, ix: usize, iy: usize, v: bool) {
        self.cells[iy * self.nx + ix] = v;
    }

    /// Marks every cell whose centre lies in `rect` as occupied.
    pub fn fill_rect(&mut self, rect: &Rect) {
        for iy in 0..self.ny {
            let cy = (iy as f64 + 0.5) * self.resolution;
            if cy < rect.y0 || cy > rect.y1 {
                continue;
            }
            for ix in 0..self.nx {
                let cx = (ix as f64 + 0.5) * self.resolution;
                if cx >= rect.x0 && cx <= rect.x1 {
                    self.set(ix, iy, true);
                }
            }
        }
    }

    /// Clears interior cells (the perimeter stays walled).
    pub fn clear_cell(&mut self, ix: usize, iy: usize) {
        if ix > 0 && iy > 0 && ix + 1 < self.nx && iy + 1 < self.ny {
            self.set(ix, iy, false);
        }
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(x >= 0.0 && y >= 0.0 && x < self.width && y < self.depth) {
            return None;
        }
        let ix = ((x / self.resolution) as usize).min(self.nx - 1);
        let iy = ((y / self.resolution) as usize).min(self.ny - 1);
        Some((ix, iy))
    }

    /// True for occupied cells, anything outside the room footprint, and
    /// anything at or below the floor or at or above the ceiling.
    pub fn is_occupied(&self, p: Vec3) -> bool {
        if !(p.z > 0.0 && p.z < self.ceiling) {
            return true;
        }
        match self.cell_of(p.x, p.y) {
            Some((ix, iy)) => self.cell(ix, iy),
            None => true,
        }
    }

    /// Distance along `direction` to the first occupied sample, stepping at
    /// half the cell size; `max_range` when nothing is hit.
    pub fn raycast(&self, origin: Vec3, direction: Vec3, max_range: f64) -> Result<f64, WorldError> {
        if (direction.norm() - 1.0).abs() > 1e-9 {
            return Err(WorldError::InvalidInput(format!(
                "ray direction must be unit length, got norm {}",
                direction.norm()
            )));
        }
        let step = self.resolution / 2.0;
        let mut k = 0usize;
        loop {
            let d = k as f64 * step;
            if d > max_range {
                return Ok(max_range);
            }
            if self.is_occupied(origin + direction * d) {
                return Ok(d.min(max_range));
            }
            k += 1;
        }
    }

    /// Plain-text rendering: a header line `width depth ceiling resolution`,
    /// then one row per cell row from the far wall (max y) to the near wall,
    /// `#` for occupied and `.` for free.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.nx + 1) * (self.ny + 1) + 32);
        writeln!(out, "{} {} {} {}", self.width, self.depth, self.ceiling, self.resolution).unwrap();
        for iy in (0..self.ny).rev() {
            for ix in 0..self.nx {
                out.push(if self.cell(ix, iy) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, WorldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| WorldError::Parse("empty map".into()))?;
        let nums: Vec<f64> = header
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| WorldError::Parse(format!("header: {e}"))))
            .collect::<Result<_, _>>()?;
        let [width, depth, ceiling, resolution] = nums[..] else {
            return Err(WorldError::Parse("header needs `width depth ceiling resolution`".into()));
        };
        let mut grid = Self::empty(width, depth, ceiling, resolution)?;
        let rows: Vec<&str> = lines.map(str::trim_end).collect();
        if rows.len() != grid.ny {
            return Err(WorldError::Parse(format!("expected {} rows, found {}", grid.ny, rows.len())));
        }
        for (r, row) in rows.iter().enumerate() {
            let iy = grid.ny - 1 - r;
            if row.chars().count() != grid.nx {
                return Err(WorldError::Parse(format!(
                    "row {} has {} cells, expected {}",
                    r + 2,
                    row.chars().count(),
                    grid.nx
                )));
            }
            for (ix, ch) in row.chars().enumerate() {
                let occupied = match ch {
                    '#' => true,
                    '.' => false,
                    other => {
                        return Err(WorldError::Parse(format!("row {}: unexpected character {other:?}", r + 2)))
                    }
                };
                grid.set(ix, iy, occupied);
            }
        }
        grid.wall_perimeter();
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupancy_boundaries() {
        let g = OccupancyGrid::default_room();
        assert!(g.is_occupied(Vec3::new(-1.0, 4.0, 1.0)));
        assert!(g.is_occupied(Vec3::new(15.0, 4.0, 1.0)));
        assert!(!g.is_occupied(Vec3::new(7.0, 4.0, 1.0)));
        assert!(g.is_occupied(Vec3::new(7.0, 4.0, -0.01)));
        assert!(g.is_occupied(Vec3::new(7.0, 4.0, 0.0)));
        assert!(g.is_occupied(Vec3::new(7.0, 4.0, 3.0)));
        // perimeter cells are walls
        assert!(g.is_occupied(Vec3::new(0.05, 4.0, 1.0)));
        assert!(g.is_occupied(Vec3::new(7.0, 7.95, 1.0)));
    }

    #[test]
    fn raycast_open_corridor_hits_max_range() {
        let g = OccupancyGrid::default_room();
        let d = g.raycast(Vec3::new(5.0, 4.0, 1.5), Vec3::X, 3.0).unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn raycast_wall_ahead() {
        let mut g = OccupancyGrid::default_room();
        // wall face at x = 6.0
        g.fill_rect(&Rect::new(6.0, 0.0, 7.0, 8.0));
        let d = g.raycast(Vec3::new(5.0, 4.0, 1.5), Vec3::X, 3.0).unwrap();
        assert!((d - 1.0).abs() <= 0.05 + 1e-12, "got {d}");
    }

    #[test]
    fn raycast_from_inside_obstacle() {
        let g = OccupancyGrid::default_room();
        assert_eq!(g.raycast(Vec3::new(0.05, 4.0, 1.0), Vec3::X, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn raycast_rejects_non_unit() {
        let g = OccupancyGrid::default_room();
        assert!(g.raycast(Vec3::new(5.0, 4.0, 1.0), Vec3::new(2.0, 0.0, 0.0), 3.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut g = OccupancyGrid::default_room();
        g.fill_rect(&Rect::new(3.0, 2.0, 4.2, 3.1));
        let text = g.to_text();
        assert!(text.starts_with("14 8 3 0.1\n"));
        let back = OccupancyGrid::from_text(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn text_rejects_bad_rows() {
        assert!(OccupancyGrid::from_text("1 1 3 0.1\n..\n").is_err());
        assert!(OccupancyGrid::from_text("").is_err());
        let mut bad = OccupancyGrid::default_room().to_text();
        bad = bad.replacen('.', "x", 1);
        assert!(OccupancyGrid::from_text(&bad).is_err());
    }
}
