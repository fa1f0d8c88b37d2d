//! D* Lite over an 8-connected grid.
//!
//! The search runs backward from the goal, so `g`/`rhs` are cost-to-goal
//! estimates. The open list is a binary heap with lazy deletion: `queued`
//! holds the live key of every locally inconsistent node and heap entries
//! that disagree with it are skipped on pop. Costs and keys are exact
//! (see `Cost`), so key ties compare equal.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::graph::{nearest_traversable, step_cost, PlanOptions, PlanPath, NEIGHBORS};
use super::queue::{Cost, Entry, Key};
use crate::world::{Cell, GridMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("start cell ({}, {}) is occupied", .0.x, .0.y)]
    StartBlocked(Cell),
    #[error("goal cell ({}, {}) is occupied", .0.x, .0.y)]
    GoalBlocked(Cell),
    #[error("cell ({x}, {y}) is outside the {w}x{h} grid", x = .0.x, y = .0.y, w = .1, h = .2)]
    OutOfBounds(Cell, usize, usize),
}

#[derive(Debug, Clone)]
pub struct DStarLite {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    g: Vec<Cost>,
    rhs: Vec<Cost>,
    queued: Vec<Option<Key>>,
    open: BinaryHeap<Reverse<Entry>>,
    km: Cost,
    start: Cell,
    goal: Cell,
    opts: PlanOptions,
    expansions: u64,
    last_expansions: u64,
}

impl DStarLite {
    /// Snapshot the traversability of `grid` and seed the search at `goal`.
    pub fn new<G: GridMap + ?Sized>(grid: &G, start: Cell, goal: Cell, opts: PlanOptions) -> Result<Self, PlanError> {
        let (width, height) = (grid.width(), grid.height());
        for c in [start, goal] {
            if !grid.in_bounds(c) {
                return Err(PlanError::OutOfBounds(c, width, height));
            }
        }
        let blocked: Vec<bool> = (0..width * height).map(|i| grid.is_blocked(grid.cell_at(i))).collect();
        let n = width * height;
        let mut planner = Self {
            width,
            height,
            blocked,
            g: vec![Cost::INF; n],
            rhs: vec![Cost::INF; n],
            queued: vec![None; n],
            open: BinaryHeap::new(),
            km: Cost::ZERO,
            start,
            goal,
            opts,
            expansions: 0,
            last_expansions: 0,
        };
        if planner.is_blocked(start) {
            return Err(PlanError::StartBlocked(start));
        }
        if planner.is_blocked(goal) {
            return Err(PlanError::GoalBlocked(goal));
        }
        let gi = planner.idx(goal);
        planner.rhs[gi] = Cost::ZERO;
        planner.enqueue(gi, Key(Cost::octile(start, goal), Cost::ZERO));
        Ok(planner)
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn km(&self) -> f64 {
        self.km.to_f64()
    }

    pub fn options(&self) -> &PlanOptions {
        &self.opts
    }

    /// Vertex expansions over the planner's lifetime.
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    /// Vertex expansions performed by the most recent `compute`.
    pub fn last_expansions(&self) -> u64 {
        self.last_expansions
    }

    /// Cells currently queued (locally inconsistent).
    pub fn queued_cells(&self) -> Vec<Cell> {
        (0..self.queued.len())
            .filter(|&i| self.queued[i].is_some())
            .map(|i| self.cell(i))
            .collect()
    }

    pub fn cost_to_goal(&self, c: Cell) -> f64 {
        if self.in_bounds(c) {
            self.g[self.idx(c)].to_f64()
        } else {
            f64::INFINITY
        }
    }

    fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    fn idx(&self, c: Cell) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    fn cell(&self, i: usize) -> Cell {
        Cell::new((i % self.width) as i32, (i / self.width) as i32)
    }

    fn is_blocked(&self, c: Cell) -> bool {
        !self.in_bounds(c) || self.blocked[self.idx(c)]
    }

    fn cost(&self, u: Cell, dx: i32, dy: i32) -> Cost {
        let c = step_cost(|c| self.is_blocked(c), u, dx, dy, &self.opts);
        if c.is_infinite() {
            Cost::INF
        } else if dx != 0 && dy != 0 {
            Cost::DIAGONAL
        } else {
            Cost::AXIS
        }
    }

    fn calc_key(&self, i: usize) -> Key {
        let m = self.g[i].min(self.rhs[i]);
        Key(m + Cost::octile(self.start, self.cell(i)) + self.km, m)
    }

    fn enqueue(&mut self, i: usize, key: Key) {
        self.queued[i] = Some(key);
        self.open.push(Reverse(Entry {
            key,
            index: i,
        }));
    }

    fn top(&mut self) -> Option<(Key, usize)> {
        while let Some(Reverse(e)) = self.open.peek() {
            if self.queued[e.index] == Some(e.key) {
                return Some((e.key, e.index));
            }
            self.open.pop();
        }
        None
    }

    fn update_vertex(&mut self, i: usize) {
        if self.g[i] != self.rhs[i] {
            let k = self.calc_key(i);
            if self.queued[i] != Some(k) {
                self.enqueue(i, k);
            }
        } else {
            self.queued[i] = None;
        }
    }

    fn best_successor_value(&self, u: Cell) -> Cost {
        let mut best = Cost::INF;
        for (dx, dy) in NEIGHBORS {
            let c = self.cost(u, dx, dy);
            if c.is_finite() {
                best = best.min(c + self.g[self.idx(u.offset(dx, dy))]);
            }
        }
        best
    }

    fn recompute_rhs(&mut self, u: Cell) {
        if u != self.goal {
            let i = self.idx(u);
            self.rhs[i] = self.best_successor_value(u);
        }
    }

    fn compute_shortest_path(&mut self) {
        let mut count = 0;
        let si = self.idx(self.start);
        loop {
            let Some((k_old, i)) = self.top() else {
                break;
            };
            let start_key = self.calc_key(si);
            if !(k_old < start_key || self.rhs[si] != self.g[si]) {
                break;
            }
            let k_new = self.calc_key(i);
            let u = self.cell(i);
            if k_old < k_new {
                self.enqueue(i, k_new);
            } else if self.g[i] > self.rhs[i] {
                self.g[i] = self.rhs[i];
                self.queued[i] = None;
                count += 1;
                for (dx, dy) in NEIGHBORS {
                    let s = u.offset(dx, dy);
                    let c = self.cost(s, -dx, -dy);
                    if c.is_inf() || s == self.goal {
                        continue;
                    }
                    let j = self.idx(s);
                    let via = c + self.g[i];
                    if via < self.rhs[j] {
                        self.rhs[j] = via;
                    }
                    self.update_vertex(j);
                }
            } else {
                let g_old = self.g[i];
                self.g[i] = Cost::INF;
                count += 1;
                for (dx, dy) in NEIGHBORS {
                    let s = u.offset(dx, dy);
                    if !self.in_bounds(s) {
                        continue;
                    }
                    let c = self.cost(s, -dx, -dy);
                    let j = self.idx(s);
                    if c.is_finite() && self.rhs[j] == c + g_old {
                        self.recompute_rhs(s);
                    }
                    self.update_vertex(j);
                }
                self.recompute_rhs(u);
                self.update_vertex(i);
            }
        }
        self.last_expansions = count;
        self.expansions += count;
    }

    /// Repair the search and extract the current optimal path, or `None`
    /// when the goal is unreachable from the start.
    pub fn compute(&mut self) -> Option<PlanPath> {
        self.compute_shortest_path();
        if self.is_blocked(self.start) || self.g[self.idx(self.start)].is_inf() {
            return None;
        }
        self.extract_path()
    }

    fn extract_path(&self) -> Option<PlanPath> {
        let mut cells = vec![self.start];
        let mut cost = Cost::ZERO;
        let mut cur = self.start;
        let limit = self.width * self.height;
        while cur != self.goal {
            let mut best: Option<(Cost, Cost, Cell)> = None;
            for (dx, dy) in NEIGHBORS {
                let c = self.cost(cur, dx, dy);
                if c.is_inf() {
                    continue;
                }
                let n = cur.offset(dx, dy);
                let v = c + self.g[self.idx(n)];
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, c, n));
                }
            }
            let (v, c, n) = best?;
            if v.is_inf() || cells.len() > limit {
                return None;
            }
            cost += c;
            cells.push(n);
            cur = n;
        }
        Some(PlanPath {
            cells,
            cost: cost.to_f64(),
        })
    }

    /// Apply traversability flips. `changed` lists cells whose blocked
    /// status in `grid` may differ from the planner's snapshot; cells that
    /// did not actually change are ignored.
    pub fn update_cells<G: GridMap + ?Sized>(&mut self, grid: &G, changed: &[Cell]) {
        let mut affected: Vec<Cell> = Vec::new();
        for &c in changed {
            if !self.in_bounds(c) {
                continue;
            }
            let now = grid.is_blocked(c);
            let i = self.idx(c);
            if self.blocked[i] == now {
                continue;
            }
            self.blocked[i] = now;
            affected.push(c);
            for (dx, dy) in NEIGHBORS {
                let n = c.offset(dx, dy);
                if self.in_bounds(n) {
                    affected.push(n);
                }
            }
        }
        affected.sort_unstable();
        affected.dedup();
        for u in affected {
            self.recompute_rhs(u);
            let i = self.idx(u);
            self.update_vertex(i);
        }
    }

    /// Move the start. A blocked target is re-seeded to the nearest
    /// traversable cell; the cell actually used is returned.
    pub fn set_start(&mut self, new_start: Cell) -> Cell {
        let target = if self.is_blocked(new_start) {
            nearest_traversable(&SnapshotView(self), new_start).unwrap_or(new_start)
        } else {
            new_start
        };
        self.km += Cost::octile(self.start, target);
        self.start = target;
        target
    }
}

/// The planner's own traversability snapshot viewed as a grid.
struct SnapshotView<'a>(&'a DStarLite);

impl GridMap for SnapshotView<'_> {
    fn width(&self) -> usize {
        self.0.width
    }

    fn height(&self) -> usize {
        self.0.height
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        self.0.is_blocked(cell)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{oracle_shortest, BoolGrid};
    use std::f64::consts::SQRT_2;

    fn opts() -> PlanOptions {
        PlanOptions::default()
    }

    #[test]
    fn init_queues_only_goal() {
        let g = BoolGrid::new(3, 3);
        let p = DStarLite::new(&g, Cell::new(0, 0), Cell::new(2, 2), opts()).unwrap();
        assert_eq!(p.queued_cells(), vec![Cell::new(2, 2)]);
        assert_eq!(p.km(), 0.0);
    }

    #[test]
    fn start_equals_goal() {
        let g = BoolGrid::new(3, 3);
        let mut p = DStarLite::new(&g, Cell::new(1, 1), Cell::new(1, 1), opts()).unwrap();
        let path = p.compute().unwrap();
        assert_eq!(path.cells, vec![Cell::new(1, 1)]);
        assert_eq!(path.cost, 0.0);
    }

    #[test]
    fn occupied_start_is_an_error() {
        let g = BoolGrid::from_rows(&["...", "...", "#.."]);
        let err = DStarLite::new(&g, Cell::new(0, 0), Cell::new(2, 2), opts()).unwrap_err();
        assert_eq!(err, PlanError::StartBlocked(Cell::new(0, 0)));
    }

    #[test]
    fn diagonal_on_empty_grid() {
        let g = BoolGrid::new(3, 3);
        let mut p = DStarLite::new(&g, Cell::new(0, 0), Cell::new(2, 2), opts()).unwrap();
        let path = p.compute().unwrap();
        assert!((path.cost - 2.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(path.cells, vec![Cell::new(0, 0), Cell::new(1, 1), Cell::new(2, 2)]);
    }

    #[test]
    fn walled_off_goal() {
        let g = BoolGrid::from_rows(&["...#.", "...#.", "...#."]);
        let mut p = DStarLite::new(&g, Cell::new(0, 0), Cell::new(4, 1), opts()).unwrap();
        assert!(p.compute().is_none());
    }

    #[test]
    fn far_flip_leaves_cost_unchanged() {
        let mut g = BoolGrid::new(20, 20);
        let mut p = DStarLite::new(&g, Cell::new(0, 0), Cell::new(5, 0), opts()).unwrap();
        let before = p.compute().unwrap().cost;
        g.set(Cell::new(15, 15), true);
        p.update_cells(&g, &[Cell::new(15, 15)]);
        assert_eq!(p.compute().unwrap().cost, before);
    }

    #[test]
    fn blocking_unique_corridor() {
        let mut g = BoolGrid::from_rows(&["#####", ".....", "#####"]);
        let mut p = DStarLite::new(&g, Cell::new(0, 1), Cell::new(4, 1), opts()).unwrap();
        assert_eq!(p.compute().unwrap().cost, 4.0);
        g.set(Cell::new(2, 1), true);
        p.update_cells(&g, &[Cell::new(2, 1)]);
        assert!(p.compute().is_none());
        g.set(Cell::new(2, 1), false);
        p.update_cells(&g, &[Cell::new(2, 1)]);
        assert_eq!(p.compute().unwrap().cost, 4.0);
    }

    #[test]
    fn block_one_of_two_routes() {
        let mut g = BoolGrid::from_rows(&[".....", ".###.", "....."]);
        let (s, t) = (Cell::new(0, 1), Cell::new(4, 1));
        let mut p = DStarLite::new(&g, s, t, opts()).unwrap();
        let before = p.compute().unwrap();
        g.set(Cell::new(2, 2), true);
        p.update_cells(&g, &[Cell::new(2, 2)]);
        let after = p.compute().unwrap();
        assert_eq!(after.cost, oracle_shortest(&g, s, t, &opts()).unwrap());
        assert!(after.is_valid_on(&g, &opts()));
        assert_eq!(after.cost, before.cost);
        assert!(after.cells.iter().all(|c| c.y <= 1));
    }

    #[test]
    fn set_start_to_same_cell_is_noop() {
        let g = BoolGrid::new(6, 6);
        let mut p = DStarLite::new(&g, Cell::new(0, 0), Cell::new(5, 3), opts()).unwrap();
        p.compute();
        assert_eq!(p.set_start(Cell::new(0, 0)), Cell::new(0, 0));
        assert_eq!(p.km(), 0.0);
    }

    #[test]
    fn moving_along_path_yields_suffix() {
        let g = BoolGrid::from_rows(&["........", "..####..", "........", "........"]);
        let (s, t) = (Cell::new(0, 0), Cell::new(7, 3));
        let mut p = DStarLite::new(&g, s, t, opts()).unwrap();
        let path = p.compute().unwrap();
        let next = path.cells[1];
        let edge = path.cost - oracle_shortest(&g, next, t, &opts()).unwrap();
        p.set_start(next);
        let suffix = p.compute().unwrap();
        assert!((suffix.cost - (path.cost - edge)).abs() < 1e-9);
        assert_eq!(suffix.cost, oracle_shortest(&g, next, t, &opts()).unwrap());
        assert_eq!(p.last_expansions(), 0);
    }

    #[test]
    fn blocked_new_start_is_reseeded() {
        let g = BoolGrid::from_rows(&["....", ".#..", "...."]);
        let mut p = DStarLite::new(&g, Cell::new(0, 0), Cell::new(3, 2), opts()).unwrap();
        assert_eq!(p.set_start(Cell::new(1, 1)), Cell::new(0, 0));
        assert!(p.compute().is_some());
    }
}


