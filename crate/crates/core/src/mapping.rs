//! The agent's obstacle map: a fixed-extent grid where each cell keeps the
//! largest number of scan endpoints that fell into it in any single scan.
//! A cell is an obstacle once that count exceeds the threshold. Cells never
//! seen, and cells outside the extent, are traversable.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::world::{Cell, DepthScan, GridMap, MetricGrid, Point, Pose};

/// Endpoints are pushed this far past the measured range so a hit exactly
/// on a cell boundary bins into the obstacle cell rather than the free one
/// in front of it.
pub(crate) const ENDPOINT_NUDGE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapperConfig {
    pub cell_size: f64,
    /// A cell is occupied when its count is strictly greater than this.
    pub occupied_threshold: u32,
    /// Height band for obstacle points. Planar scans have no height, so
    /// the band is kept for configuration only and never filters.
    pub h_min: f64,
    pub h_max: f64,
}

impl MapperConfig {
    /// Threshold for dense per-pixel depth images.
    pub const DEPTH_IMAGE_THRESHOLD: u32 = 128;
    /// Threshold for sparse (keypoint) depth.
    pub const SPARSE_THRESHOLD: u32 = 30;
}

impl Default for MapperConfig {
    fn default() -> Self {
        Self {
            cell_size: 0.1,
            occupied_threshold: 2,
            h_min: 0.1,
            h_max: 1.145,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleMap {
    cell_size: f64,
    origin: Point,
    width: usize,
    height: usize,
    threshold: u32,
    max_count: Vec<u32>,
    observed: Vec<bool>,
    occupied: usize,
    dropped: u64,
}

impl ObstacleMap {
    /// Empty map covering `width`x`height` cells whose lower-left corner
    /// sits at `origin` in the estimate frame.
    pub fn new(cfg: &MapperConfig, origin: Point, width: usize, height: usize) -> Self {
        assert!(cfg.cell_size > 0.0, "cell size must be positive");
        let n = width * height;
        Self {
            cell_size: cfg.cell_size,
            origin,
            width,
            height,
            threshold: cfg.occupied_threshold,
            max_count: vec![0; n],
            observed: vec![false; n],
            occupied: 0,
            dropped: 0,
        }
    }

    /// Map with the same extent and resolution as a reference grid.
    pub fn covering<G: MetricGrid + ?Sized>(cfg: &MapperConfig, grid: &G) -> Self {
        let w = (grid.width() as f64 * grid.cell_size() / cfg.cell_size).ceil() as usize;
        let h = (grid.height() as f64 * grid.cell_size() / cfg.cell_size).ceil() as usize;
        Self::new(cfg, grid.origin(), w, h)
    }

    /// Map with every blocked cell of `grid` already occupied, as if the
    /// whole environment had been observed.
    pub fn revealed<G: MetricGrid + ?Sized>(cfg: &MapperConfig, grid: &G) -> Self {
        assert_eq!(cfg.cell_size, grid.cell_size(), "resolution must match");
        let mut m = Self::new(cfg, grid.origin(), grid.width(), grid.height());
        for i in 0..m.max_count.len() {
            m.observed[i] = true;
            if grid.is_blocked(grid.cell_at(i)) {
                m.max_count[i] = m.threshold + 1;
                m.occupied += 1;
            }
        }
        m
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn count(&self, c: Cell) -> u32 {
        if self.in_bounds(c) {
            self.max_count[self.index(c)]
        } else {
            0
        }
    }

    pub fn is_observed(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.observed[self.index(c)]
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        self.count(c) > self.threshold
    }

    pub fn is_traversable(&self, c: Cell) -> bool {
        !self.is_occupied(c)
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.max_count.len())
            .filter(|&i| self.max_count[i] > self.threshold)
            .map(|i| self.cell_at(i))
    }

    /// Endpoints discarded because they fell outside the extent.
    pub fn dropped_endpoints(&self) -> u64 {
        self.dropped
    }

    pub fn reset(&mut self) {
        self.max_count.iter_mut().for_each(|c| *c = 0);
        self.observed.iter_mut().for_each(|o| *o = false);
        self.occupied = 0;
        self.dropped = 0;
    }

    /// Bin the valid endpoints of `scan` taken from `pose` and mark the
    /// cells crossed by every ray as observed. Returns the cells whose
    /// occupied status changed, in index order.
    pub fn integrate_scan(&mut self, pose: &Pose, scan: &DepthScan) -> Vec<Cell> {
        let mut binned: HashMap<usize, u32> = HashMap::new();
        let origin = pose.position();
        for i in 0..scan.n_rays() {
            let off = scan.ray_offset(i);
            let range = if scan.valid[i] { scan.ranges[i] } else { scan.max_range };
            let end = pose.polar_to_world(range, off);
            self.mark_observed(origin, end);
            if !scan.valid[i] {
                continue;
            }
            let c = self.cell_of(pose.polar_to_world(range + ENDPOINT_NUDGE, off));
            if self.in_bounds(c) {
                *binned.entry(self.index(c)).or_default() += 1;
            } else {
                self.dropped += 1;
            }
        }
        let mut changed = Vec::new();
        for (i, n) in binned {
            let before = self.max_count[i] > self.threshold;
            self.max_count[i] = self.max_count[i].max(n);
            if !before && self.max_count[i] > self.threshold {
                self.occupied += 1;
                changed.push(i);
            }
        }
        changed.sort_unstable();
        changed.into_iter().map(|i| self.cell_at(i)).collect()
    }

    fn mark_observed(&mut self, from: Point, to: Point) {
        let s = self.cell_size;
        let a = Point::new((from.x - self.origin.x) / s, (from.y - self.origin.y) / s);
        let b = Point::new((to.x - self.origin.x) / s, (to.y - self.origin.y) / s);
        let mut cell = Cell::new(a.x.floor() as i32, a.y.floor() as i32);
        let last = Cell::new(b.x.floor() as i32, b.y.floor() as i32);
        let d = b - a;
        let (sx, mut tx, dtx) = axis(a.x, d.x);
        let (sy, mut ty, dty) = axis(a.y, d.y);
        let budget = (last.x - cell.x).abs() + (last.y - cell.y).abs();
        for _ in 0..=budget {
            if self.in_bounds(cell) {
                let i = self.index(cell);
                self.observed[i] = true;
            }
            if cell == last {
                break;
            }
            if tx < ty {
                cell.x += sx;
                tx += dtx;
            } else {
                cell.y += sy;
                ty += dty;
            }
        }
    }

    /// Occupancy in the plain map text format (`#` occupied, `.` free).
    /// The origin is written as a comment since the map format assumes
    /// the origin at zero.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "; obstacle map, origin {} {}", self.origin.x, self.origin.y);
        let _ = writeln!(out, "cell_size {}", self.cell_size);
        let _ = writeln!(out, "width {}", self.width);
        let _ = writeln!(out, "height {}", self.height);
        out.push_str("grid\n");
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                out.push(if self.max_count[y * self.width + x] > self.threshold { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    /// Count matrix as comma-separated rows, top row first.
    pub fn counts_csv(&self) -> String {
        let mut out = String::new();
        for y in (0..self.height).rev() {
            let row: Vec<String> = (0..self.width)
                .map(|x| self.max_count[y * self.width + x].to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn axis(start: f64, d: f64) -> (i32, f64, f64) {
    if d > 0.0 {
        (1, (start.floor() + 1.0 - start) / d, 1.0 / d)
    } else if d < 0.0 {
        (-1, (start - start.floor()) / -d, -1.0 / d)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

impl GridMap for ObstacleMap {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        self.is_occupied(cell)
    }
}

impl MetricGrid for ObstacleMap {
    fn cell_size(&self) -> f64 {
        self.cell_size
    }

    fn origin(&self) -> Point {
        self.origin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{raycast, SensorConfig, WorldMap};
    use proptest::prelude::*;

    fn cfg(threshold: u32) -> MapperConfig {
        MapperConfig {
            occupied_threshold: threshold,
            ..MapperConfig::default()
        }
    }

    /// Scan whose valid rays all have the same range, straight ahead.
    fn narrow_scan(hits: usize, range: f64) -> DepthScan {
        DepthScan {
            fov: 1e-4,
            ranges: vec![range; hits],
            valid: vec![true; hits],
            max_range: 4.0,
        }
    }

    #[test]
    fn threshold_crossing_reports_the_cell() {
        let mut m = ObstacleMap::new(&cfg(4), Point::new(0.0, 0.0), 20, 20);
        let pose = Pose::new(0.55, 0.55, 0.0);
        let changed = m.integrate_scan(&pose, &narrow_scan(5, 0.5));
        assert_eq!(changed, vec![Cell::new(10, 5)]);
        assert!(m.is_occupied(Cell::new(10, 5)));
    }

    #[test]
    fn keeps_maximum_not_sum() {
        let mut m = ObstacleMap::new(&cfg(2), Point::new(0.0, 0.0), 20, 20);
        let pose = Pose::new(0.55, 0.55, 0.0);
        m.integrate_scan(&pose, &narrow_scan(3, 0.5));
        m.integrate_scan(&pose, &narrow_scan(2, 0.5));
        assert_eq!(m.count(Cell::new(10, 5)), 3);
    }

    #[test]
    fn threshold_is_strict() {
        let mut m = ObstacleMap::new(&cfg(3), Point::new(0.0, 0.0), 20, 20);
        let pose = Pose::new(0.55, 0.55, 0.0);
        assert!(m.integrate_scan(&pose, &narrow_scan(3, 0.5)).is_empty());
        assert!(m.is_traversable(Cell::new(10, 5)));
        assert_eq!(m.integrate_scan(&pose, &narrow_scan(4, 0.5)), vec![Cell::new(10, 5)]);
        assert!(!m.is_traversable(Cell::new(10, 5)));
    }

    #[test]
    fn invalid_rays_change_nothing_but_mark_observed() {
        let mut m = ObstacleMap::new(&cfg(2), Point::new(0.0, 0.0), 60, 60);
        let scan = DepthScan::empty(&SensorConfig::default());
        assert!(m.integrate_scan(&Pose::new(3.0, 3.0, 0.0), &scan).is_empty());
        assert_eq!(m.occupied_count(), 0);
        assert!(m.is_observed(Cell::new(45, 30)));
        assert!(!m.is_observed(Cell::new(10, 30)));
    }

    #[test]
    fn unobserved_and_outside_are_traversable() {
        let m = ObstacleMap::new(&cfg(2), Point::new(0.0, 0.0), 5, 5);
        assert!(m.is_traversable(Cell::new(2, 2)));
        assert!(m.is_traversable(Cell::new(-3, 9)));
        assert!(!m.is_blocked(Cell::new(-3, 9)));
    }

    #[test]
    fn out_of_extent_endpoints_are_tallied() {
        let mut m = ObstacleMap::new(&cfg(2), Point::new(0.0, 0.0), 10, 10);
        m.integrate_scan(&Pose::new(0.5, 0.5, 0.0), &narrow_scan(4, 2.0));
        assert_eq!(m.dropped_endpoints(), 4);
        assert_eq!(m.occupied_count(), 0);
    }

    #[test]
    fn reset_clears_and_replays_identically() {
        let world = WorldMap::empty_room(0.1, 30, 30).unwrap();
        let pose = Pose::new(1.5, 1.5, 0.3);
        let scan = raycast(&world, &pose, &SensorConfig::default());
        let mut once = ObstacleMap::covering(&MapperConfig::default(), &world);
        once.integrate_scan(&pose, &scan);

        let mut m = once.clone();
        m.reset();
        assert_eq!(m.occupied_count(), 0);
        m.reset();
        assert_eq!(m.occupied_count(), 0);
        m.integrate_scan(&pose, &scan);
        assert_eq!(m, once);
    }

    #[test]
    fn wall_hits_bin_into_wall_cells() {
        let world = WorldMap::empty_room(0.1, 30, 30).unwrap();
        let pose = Pose::new(1.5, 1.5, 0.0);
        let scan = raycast(&world, &pose, &SensorConfig::default());
        let mut m = ObstacleMap::covering(&MapperConfig::default(), &world);
        m.integrate_scan(&pose, &scan);
        assert!(m.occupied_count() > 0);
        for c in m.occupied_cells() {
            assert!(world.is_occupied(c), "{c:?}");
        }
    }

    #[test]
    fn text_dump_shapes() {
        let mut m = ObstacleMap::new(&cfg(0), Point::new(0.0, 0.0), 4, 3);
        m.integrate_scan(&Pose::new(0.05, 0.05, 0.0), &narrow_scan(1, 0.2));
        let text = m.to_text();
        assert!(text.ends_with("grid\n....\n....\n..#.\n"));
        assert_eq!(m.counts_csv(), "0,0,0,0\n0,0,0,0\n0,0,1,0\n");
    }

    proptest! {
        #[test]
        fn occupied_set_only_grows(seed in 0u64..500, headings in prop::collection::vec(-3.1f64..3.1, 1..6)) {
            let world = crate::world::generate_map(seed, &crate::world::GeneratorConfig::furnished()).unwrap();
            let free = crate::world::spawn_cells(&world);
            let c = free[(seed as usize * 7) % free.len()];
            let p = world.cell_center(c);
            let mut m = ObstacleMap::covering(&MapperConfig::default(), &world);
            let mut prev: Vec<Cell> = Vec::new();
            for h in headings {
                let pose = Pose::new(p.x, p.y, h);
                let scan = raycast(&world, &pose, &SensorConfig::default());
                m.integrate_scan(&pose, &scan);
                let again = m.integrate_scan(&pose, &scan);
                prop_assert!(again.is_empty());
                let now: Vec<Cell> = m.occupied_cells().collect();
                prop_assert!(prev.iter().all(|c| now.contains(c)));
                for c in &now {
                    let near = (-1..=1).any(|dy| (-1..=1).any(|dx| world.is_occupied(c.offset(dx, dy))));
                    prop_assert!(near);
                }
                prev = now;
            }
        }
    }
}
