use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::world::{Cell, GridMap};

/// Neighbor order used for expansion and for path tie-breaking:
/// E, NE, N, NW, W, SW, S, SE.
pub const NEIGHBORS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanOptions {
    /// Allow a diagonal move between two blocked axis neighbors.
    pub allow_corner_cutting: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            allow_corner_cutting: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no path between start and goal")]
pub struct NoPath;

/// Octile distance, exact on an obstacle-free 8-connected grid.
pub fn heuristic(a: Cell, b: Cell) -> f64 {
    let dx = (a.x - b.x).abs();
    let dy = (a.y - b.y).abs();
    let (hi, lo) = if dx > dy { (dx, dy) } else { (dy, dx) };
    hi as f64 + (SQRT_2 - 1.0) * lo as f64
}

/// Cost of moving from `u` to its neighbor `u + (dx, dy)` on `blocked`.
#[inline]
pub(crate) fn step_cost(
    blocked: impl Fn(Cell) -> bool,
    u: Cell,
    dx: i32,
    dy: i32,
    opts: &PlanOptions,
) -> f64 {
    let v = u.offset(dx, dy);
    if blocked(u) || blocked(v) {
        return f64::INFINITY;
    }
    if dx != 0 && dy != 0 {
        if !opts.allow_corner_cutting && (blocked(u.offset(dx, 0)) || blocked(u.offset(0, dy))) {
            return f64::INFINITY;
        }
        SQRT_2
    } else {
        1.0
    }
}

/// Blocked test restricted to the grid extent: cells outside are never
/// graph nodes.
pub(crate) fn node_blocked<G: GridMap + ?Sized>(grid: &G) -> impl Fn(Cell) -> bool + '_ {
    move |c| !grid.in_bounds(c) || grid.is_blocked(c)
}

/// Nearest traversable cell to `from`: rings of growing Chebyshev radius,
/// taking the smallest row-major index within the first ring that has one.
pub fn nearest_traversable<G: GridMap + ?Sized>(grid: &G, from: Cell) -> Option<Cell> {
    let blocked = node_blocked(grid);
    let max_r = grid.width().max(grid.height()) as i32 + from.x.abs().max(from.y.abs());
    for r in 0..=max_r {
        let mut best: Option<Cell> = None;
        for y in from.y - r..=from.y + r {
            for x in from.x - r..=from.x + r {
                let c = Cell::new(x, y);
                if c.chebyshev(from) != r || blocked(c) {
                    continue;
                }
                if best.is_none_or(|b| grid.index(c) < grid.index(b)) {
                    best = Some(c);
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Plain boolean grid; cells outside the extent are blocked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolGrid {
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
}

impl BoolGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            blocked: vec![false; width * height],
        }
    }

    pub fn set(&mut self, c: Cell, blocked: bool) {
        let i = self.index(c);
        self.blocked[i] = blocked;
    }

    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows[0].len();
        let mut g = Self::new(width, height);
        for (r, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                g.set(Cell::new(x as i32, (height - 1 - r) as i32), ch == '#');
            }
        }
        g
    }
}

impl GridMap for BoolGrid {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        !self.in_bounds(cell) || self.blocked[self.index(cell)]
    }
}

/// Ordered cells from start to goal with their summed edge cost, in cell
/// units.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPath {
    pub cells: Vec<Cell>,
    pub cost: f64,
}

impl PlanPath {
    /// Check the structural invariants against `grid`: 8-adjacent steps,
    /// traversable cells, and a cost equal to the summed edge weights.
    pub fn is_valid_on<G: GridMap + ?Sized>(&self, grid: &G, opts: &PlanOptions) -> bool {
        let blocked = node_blocked(grid);
        if self.cells.iter().any(|c| blocked(*c)) {
            return false;
        }
        let mut total = 0.0;
        for w in self.cells.windows(2) {
            let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
            if dx.abs() > 1 || dy.abs() > 1 || (dx, dy) == (0, 0) {
                return false;
            }
            total += step_cost(&blocked, w[0], dx, dy, opts);
        }
        total.is_finite() && (total - self.cost).abs() < 1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_examples() {
        assert_eq!(heuristic(Cell::new(0, 0), Cell::new(3, 0)), 3.0);
        assert!((heuristic(Cell::new(0, 0), Cell::new(2, 2)) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((heuristic(Cell::new(0, 0), Cell::new(3, 1)) - (2.0 + SQRT_2)).abs() < 1e-12);
        assert_eq!(heuristic(Cell::new(4, 4), Cell::new(4, 4)), 0.0);
    }

    #[test]
    fn corner_cutting_rule() {
        let g = BoolGrid::from_rows(&["...", ".#.", "..."]);
        let blocked = node_blocked(&g);
        let opts = PlanOptions::default();
        // (0,0) -> (1,1) goes into the block itself.
        assert!(step_cost(&blocked, Cell::new(0, 0), 1, 1, &opts).is_infinite());
        // (0,1) -> (1,2) squeezes past (1,1).
        assert!(step_cost(&blocked, Cell::new(0, 1), 1, 1, &opts).is_infinite());
        let lenient = PlanOptions {
            allow_corner_cutting: true,
        };
        assert_eq!(step_cost(&blocked, Cell::new(0, 1), 1, 1, &lenient), SQRT_2);
    }

    #[test]
    fn nearest_traversable_picks_smallest_index_in_ring() {
        let g = BoolGrid::from_rows(&[".....", ".###.", ".###.", ".###.", "....."]);
        // Centre (2,2) blocked, ring 1 fully blocked, ring 2 all free:
        // smallest row-major index is (0,0).
        assert_eq!(nearest_traversable(&g, Cell::new(2, 2)), Some(Cell::new(0, 0)));
        assert_eq!(nearest_traversable(&g, Cell::new(0, 4)), Some(Cell::new(0, 4)));
    }
}
