use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::pose::Point;
use crate::planning::{self, NoPath, PlanOptions};

/// Integer grid coordinate. `x` is the column, `y` the row; row 0 is the
/// bottom of the map (smallest world y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Rectangle of cells, inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub x_min: i32,
    pub y_min: i32,
    pub x_max: i32,
    pub y_max: i32,
}

impl CellRect {
    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x_min && c.x <= self.x_max && c.y >= self.y_min && c.y <= self.y_max
    }
}

/// Anything that can be viewed as a rectangular grid of blocked/free cells.
pub trait GridMap {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    /// Whether `cell` is an obstacle. Cells outside the extent follow the
    /// implementor's convention.
    fn is_blocked(&self, cell: Cell) -> bool;

    fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0 && cell.y >= 0 && (cell.x as usize) < self.width() && (cell.y as usize) < self.height()
    }

    fn index(&self, cell: Cell) -> usize {
        cell.y as usize * self.width() + cell.x as usize
    }

    fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width()) as i32, (index / self.width()) as i32)
    }
}

/// A grid anchored in metric space.
pub trait MetricGrid: GridMap {
    fn cell_size(&self) -> f64;
    /// World coordinates of the lower-left corner of cell (0, 0).
    fn origin(&self) -> Point;

    fn cell_of(&self, p: Point) -> Cell {
        let o = self.origin();
        let s = self.cell_size();
        Cell::new(
            ((p.x - o.x) / s).floor() as i32,
            ((p.y - o.y) / s).floor() as i32,
        )
    }

    fn cell_center(&self, c: Cell) -> Point {
        let o = self.origin();
        let s = self.cell_size();
        Point::new(o.x + (c.x as f64 + 0.5) * s, o.y + (c.y as f64 + 0.5) * s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("grid has {found} cells, expected {width}x{height}")]
    SizeMismatch {
        width: usize,
        height: usize,
        found: usize,
    },
    #[error("map must be at least 3x3 cells, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("border cell ({0}, {1}) is free; the outer border must be closed")]
    OpenBorder(i32, i32),
    #[error("map has no free cell")]
    NoFreeCell,
    #[error("cell size must be positive, got {0}")]
    BadCellSize(f64),
}

/// Ground-truth occupancy grid. Immutable once built; share with `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    cell_size: f64,
    width: usize,
    height: usize,
    occupied: Vec<bool>,
    spawn_region: Option<CellRect>,
}

impl WorldMap {
    pub fn new(
        cell_size: f64,
        width: usize,
        height: usize,
        occupied: Vec<bool>,
    ) -> Result<Self, WorldError> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(WorldError::BadCellSize(cell_size));
        }
        if width < 3 || height < 3 {
            return Err(WorldError::TooSmall(width, height));
        }
        if occupied.len() != width * height {
            return Err(WorldError::SizeMismatch {
                width,
                height,
                found: occupied.len(),
            });
        }
        let map = Self {
            cell_size,
            width,
            height,
            occupied,
            spawn_region: None,
        };
        for x in 0..width as i32 {
            for y in [0, height as i32 - 1] {
                if !map.is_blocked(Cell::new(x, y)) {
                    return Err(WorldError::OpenBorder(x, y));
                }
            }
        }
        for y in 0..height as i32 {
            for x in [0, width as i32 - 1] {
                if !map.is_blocked(Cell::new(x, y)) {
                    return Err(WorldError::OpenBorder(x, y));
                }
            }
        }
        if !map.occupied.iter().any(|o| !o) {
            return Err(WorldError::NoFreeCell);
        }
        Ok(map)
    }

    /// Build from text rows, top row first, `#` occupied and `.` free.
    /// Panics on malformed rows; intended for fixtures.
    pub fn from_rows(cell_size: f64, rows: &[&str]) -> Result<Self, WorldError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut occupied = vec![false; width * height];
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), width, "ragged fixture row {r}");
            let y = height - 1 - r;
            for (x, ch) in row.chars().enumerate() {
                occupied[y * width + x] = match ch {
                    '#' => true,
                    '.' => false,
                    other => panic!("bad fixture glyph {other:?}"),
                };
            }
        }
        Self::new(cell_size, width, height, occupied)
    }

    /// Rectangular room of `width`x`height` cells including the wall ring.
    pub fn empty_room(cell_size: f64, width: usize, height: usize) -> Result<Self, WorldError> {
        let mut occ = vec![false; width * height];
        for y in 0..height {
            for x in 0..width {
                if x == 0 || y == 0 || x == width - 1 || y == height - 1 {
                    occ[y * width + x] = true;
                }
            }
        }
        Self::new(cell_size, width, height, occ)
    }

    pub fn with_spawn_region(mut self, region: Option<CellRect>) -> Self {
        self.spawn_region = region;
        self
    }

    pub fn spawn_region(&self) -> Option<CellRect> {
        self.spawn_region
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        self.is_blocked(c)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, o)| !**o)
            .map(|(i, _)| self.cell_at(i))
    }

    /// Free cell whose 8 neighbors are also free. A disc of radius up to
    /// 1.5 cells centred there is clear of obstacles.
    pub fn is_clear(&self, c: Cell) -> bool {
        (-1..=1).all(|dy| (-1..=1).all(|dx| !self.is_blocked(c.offset(dx, dy))))
    }

    /// Fraction of occupied cells, excluding the outer border ring.
    pub fn interior_occupancy(&self) -> f64 {
        let mut occ = 0usize;
        let mut total = 0usize;
        for y in 1..self.height as i32 - 1 {
            for x in 1..self.width as i32 - 1 {
                total += 1;
                occ += self.is_blocked(Cell::new(x, y)) as usize;
            }
        }
        occ as f64 / total as f64
    }

    /// True when every free cell is reachable from every other through
    /// 8-connected moves between free cells.
    pub fn free_space_connected(&self) -> bool {
        let Some(first) = self.free_cells().next() else {
            return false;
        };
        let total = self.occupied.iter().filter(|o| !**o).count();
        let mut seen = vec![false; self.occupied.len()];
        let mut queue = VecDeque::from([first]);
        seen[self.index(first)] = true;
        let mut count = 1;
        while let Some(c) = queue.pop_front() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let n = c.offset(dx, dy);
                    if (dx, dy) != (0, 0) && !self.is_blocked(n) && !seen[self.index(n)] {
                        seen[self.index(n)] = true;
                        count += 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        count == total
    }

    /// Length in meters of the optimal 8-connected grid path between the
    /// cells containing `start` and `goal`.
    pub fn shortest_path_length(&self, start: Point, goal: Point) -> Result<f64, NoPath> {
        let s = self.cell_of(start);
        let g = self.cell_of(goal);
        planning::oracle_shortest(self, s, g, &PlanOptions::default()).map(|c| c * self.cell_size)
    }
}

impl GridMap for WorldMap {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        !self.in_bounds(cell) || self.occupied[self.index(cell)]
    }
}

impl MetricGrid for WorldMap {
    fn cell_size(&self) -> f64 {
        self.cell_size
    }

    fn origin(&self) -> Point {
        Point::new(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn rejects_open_border() {
        let err = WorldMap::from_rows(0.1, &["###", "#..", "###"]).unwrap_err();
        assert_eq!(err, WorldError::OpenBorder(2, 1));
    }

    #[test]
    fn rejects_all_occupied() {
        let err = WorldMap::from_rows(0.1, &["###", "###", "###"]).unwrap_err();
        assert_eq!(err, WorldError::NoFreeCell);
    }

    #[test]
    fn row_order_is_top_first() {
        let m = WorldMap::from_rows(0.1, &["####", "#.##", "#..#", "####"]).unwrap();
        assert!(!m.is_occupied(Cell::new(1, 2)));
        assert!(m.is_occupied(Cell::new(2, 2)));
        assert!(!m.is_occupied(Cell::new(2, 1)));
    }

    #[test]
    fn shortest_path_straight_and_diagonal() {
        let m = WorldMap::empty_room(0.1, 14, 14).unwrap();
        let a = m.cell_center(Cell::new(2, 2));
        let b = m.cell_center(Cell::new(12, 2));
        assert!((m.shortest_path_length(a, b).unwrap() - 1.0).abs() < 1e-9);
        let c = m.cell_center(Cell::new(12, 12));
        assert!((m.shortest_path_length(a, c).unwrap() - SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn shortest_path_disconnected() {
        let m = WorldMap::from_rows(0.1, &["#####", "#.#.#", "#####"]).unwrap();
        let a = m.cell_center(Cell::new(1, 1));
        let b = m.cell_center(Cell::new(3, 1));
        assert_eq!(m.shortest_path_length(a, b), Err(NoPath));
        assert!(!m.free_space_connected());
    }
}
