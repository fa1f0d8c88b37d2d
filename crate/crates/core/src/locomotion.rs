//! Waypoint follower: turn toward a point `d1` ahead on the planned path
//! until it lies within `phi` of the heading, then drive forward.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::world::{normalize_angle, Action, Point, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Look-ahead distance along the path, meters.
    pub d1: f64,
    /// Waypoints closer than this are advanced before acting.
    pub d2: f64,
    /// Half-angle of the forward cone, radians.
    pub phi: f64,
    /// Probability of replacing the action with a random motion.
    pub p_random: f64,
    /// Done is emitted once the goal is closer than this.
    pub done_threshold: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            d1: 0.5,
            d2: 0.15,
            phi: 15f64.to_radians(),
            p_random: 0.1,
            done_threshold: 0.5,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.d2 < self.d1) {
            return Err(format!("d2 ({}) must be below d1 ({})", self.d2, self.d1));
        }
        if !(0.0..1.0).contains(&self.p_random) {
            return Err("p_random must lie in [0, 1)".into());
        }
        if !(self.phi > 0.0 && self.phi < PI) {
            return Err("phi must lie in (0, pi)".into());
        }
        Ok(())
    }
}

/// Rotate toward `bearing` (positive is left) or go forward if it is
/// already inside the cone. A bearing of exactly ±π turns left.
pub fn steer(bearing: f64, phi: f64) -> Action {
    let b = normalize_angle(bearing);
    if b == -PI {
        Action::TurnLeft
    } else if b > phi {
        Action::TurnLeft
    } else if b < -phi {
        Action::TurnRight
    } else {
        Action::Forward
    }
}

/// Closest point of the polyline to `p`, as (segment index, parameter).
fn project(path: &[Point], p: Point) -> (usize, f64) {
    let mut best = (0, 0.0, f64::INFINITY);
    for i in 0..path.len().saturating_sub(1) {
        let (a, b) = (path[i], path[i + 1]);
        let ab = b - a;
        let len2 = ab.dot(ab);
        let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) };
        let d = p.distance(a.lerp(b, t));
        if d < best.2 {
            best = (i, t, d);
        }
    }
    (best.0, best.1)
}

/// Walk `dist` meters along the polyline from (segment, parameter).
fn walk(path: &[Point], seg: usize, t: f64, dist: f64) -> Point {
    let mut left = dist;
    let mut from = path[seg].lerp(path[(seg + 1).min(path.len() - 1)], t);
    for i in seg..path.len().saturating_sub(1) {
        let to = path[i + 1];
        let len = from.distance(to);
        if len >= left {
            return if len == 0.0 { to } else { from.lerp(to, left / len) };
        }
        left -= len;
        from = to;
    }
    *path.last().expect("non-empty path")
}

/// Point `d1` meters of arc length beyond the agent's projection onto
/// `path`, or the path end when less remains. `None` for an empty path.
pub fn select_waypoint(path: &[Point], position: Point, d1: f64) -> Option<Point> {
    match path {
        [] => None,
        [only] => Some(*only),
        _ => {
            let (seg, t) = project(path, position);
            Some(walk(path, seg, t, d1))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ControllerConfig,
    waypoint: Option<Point>,
    rng: ChaCha8Rng,
}

impl Controller {
    pub fn new(cfg: ControllerConfig, seed: u64) -> Self {
        Self {
            cfg,
            waypoint: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn waypoint(&self) -> Option<Point> {
        self.waypoint
    }

    /// Pick the waypoint on a (possibly new) path.
    pub fn set_path(&mut self, path: &[Point], pose: &Pose) {
        self.waypoint = select_waypoint(path, pose.position(), self.cfg.d1);
    }

    pub fn clear(&mut self) {
        self.waypoint = None;
    }

    /// Next action toward the current waypoint. `path` is the path the
    /// waypoint was chosen on; it is used to advance a waypoint that is
    /// already within `d2`.
    pub fn act(&mut self, pose: &Pose, goal_distance: f64, path: &[Point]) -> Action {
        if goal_distance < self.cfg.done_threshold {
            return Action::Done;
        }
        if self.rng.random::<f64>() < self.cfg.p_random {
            return Action::MOTION[self.rng.random_range(0..Action::MOTION.len())];
        }
        let Some(mut wp) = self.waypoint else {
            return Action::Forward;
        };
        if wp.distance(pose.position()) < self.cfg.d2 && path.len() > 1 {
            let (seg, t) = project(path, wp);
            wp = walk(path, seg, t, self.cfg.d1);
            self.waypoint = Some(wp);
        }
        let d = wp - pose.position();
        if d.norm() == 0.0 {
            return Action::Forward;
        }
        steer(d.y.atan2(d.x) - pose.heading, self.cfg.phi)
    }
}
