use serde::{Deserialize, Serialize};

use super::grid::{Cell, MetricGrid};
use super::pose::{Point, Pose};

/// Planar depth scanner: a fan of rays standing in for one row of a depth
/// image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    pub fov: f64,
    pub n_rays: usize,
    pub min_range: f64,
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov: 90f64.to_radians(),
            n_rays: 256,
            min_range: 0.001,
            max_range: 4.0,
        }
    }
}

impl SensorConfig {
    /// Angle of ray `i` relative to the heading. Rays run left to right,
    /// from `+fov/2` to `-fov/2` inclusive.
    pub fn ray_offset(&self, i: usize) -> f64 {
        if self.n_rays <= 1 {
            return 0.0;
        }
        self.fov / 2.0 - self.fov * i as f64 / (self.n_rays - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScan {
    pub fov: f64,
    /// Range per ray in meters. Invalid rays hold `max_range`.
    pub ranges: Vec<f64>,
    pub valid: Vec<bool>,
    pub max_range: f64,
}

impl DepthScan {
    /// A scan where nothing was seen.
    pub fn empty(cfg: &SensorConfig) -> Self {
        Self {
            fov: cfg.fov,
            ranges: vec![cfg.max_range; cfg.n_rays],
            valid: vec![false; cfg.n_rays],
            max_range: cfg.max_range,
        }
    }

    pub fn n_rays(&self) -> usize {
        self.ranges.len()
    }

    pub fn ray_offset(&self, i: usize) -> f64 {
        let n = self.n_rays();
        if n <= 1 {
            return 0.0;
        }
        self.fov / 2.0 - self.fov * i as f64 / (n - 1) as f64
    }

    /// `(offset, range)` for every valid ray.
    pub fn valid_rays(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n_rays())
            .filter(|&i| self.valid[i])
            .map(|i| (self.ray_offset(i), self.ranges[i]))
    }

    /// World-frame endpoints of valid rays as seen from `pose`.
    pub fn endpoints<'a>(&'a self, pose: &'a Pose) -> impl Iterator<Item = Point> + 'a {
        self.valid_rays()
            .map(move |(off, r)| pose.polar_to_world(r, off))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Exact distance along a ray to the first blocked cell boundary, using
/// grid traversal. `None` when nothing is hit within `max_range`.
pub fn cast_ray<G: MetricGrid + ?Sized>(grid: &G, origin: Point, angle: f64, max_range: f64) -> Option<f64> {
    let s = grid.cell_size();
    let o = grid.origin();
    let gx = (origin.x - o.x) / s;
    let gy = (origin.y - o.y) / s;
    let (dy, dx) = angle.sin_cos();
    let mut cell = Cell::new(gx.floor() as i32, gy.floor() as i32);
    if grid.is_blocked(cell) {
        return Some(0.0);
    }
    let limit = max_range / s;
    let (step_x, mut t_max_x, t_delta_x) = axis(gx, dx);
    let (step_y, mut t_max_y, t_delta_y) = axis(gy, dy);
    let w = grid.width() as i32;
    let h = grid.height() as i32;
    loop {
        let t = if t_max_x < t_max_y {
            cell.x += step_x;
            let t = t_max_x;
            t_max_x += t_delta_x;
            t
        } else {
            cell.y += step_y;
            let t = t_max_y;
            t_max_y += t_delta_y;
            t
        };
        if t > limit || !t.is_finite() {
            return None;
        }
        if grid.is_blocked(cell) {
            return Some(t * s);
        }
        // Unbounded grids (agent maps) treat outside as free: give up once
        // the ray has left the extent for good.
        if (cell.x < -1 && step_x <= 0) || (cell.x > w && step_x >= 0) || (cell.y < -1 && step_y <= 0) || (cell.y > h && step_y >= 0) {
            return None;
        }
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

pub fn raycast<G: MetricGrid + ?Sized>(grid: &G, pose: &Pose, sensor: &SensorConfig) -> DepthScan {
    let mut ranges = Vec::with_capacity(sensor.n_rays);
    let mut valid = Vec::with_capacity(sensor.n_rays);
    for i in 0..sensor.n_rays {
        match cast_ray(grid, pose.position(), pose.heading + sensor.ray_offset(i), sensor.max_range) {
            Some(r) if r <= sensor.max_range => {
                ranges.push(r.max(sensor.min_range));
                valid.push(true);
            }
            _ => {
                ranges.push(sensor.max_range);
                valid.push(false);
            }
        }
    }
    DepthScan {
        fov: sensor.fov,
        ranges,
        valid,
        max_range: sensor.max_range,
    }
}
