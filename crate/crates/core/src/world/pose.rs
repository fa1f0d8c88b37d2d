use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Wrap an angle into `[-π, π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(TAU);
    // rem_euclid may round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        -PI
    } else {
        wrapped - PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Planar agent pose. `heading` is kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn direction(&self) -> Point {
        Point::new(self.heading.cos(), self.heading.sin())
    }

    pub fn with_position(&self, p: Point) -> Pose {
        Pose {
            x: p.x,
            y: p.y,
            heading: self.heading,
        }
    }

    pub fn rotated(&self, delta: f64) -> Pose {
        Pose::new(self.x, self.y, self.heading + delta)
    }

    /// Express a world point in this pose's frame (x forward, y left).
    pub fn to_local(&self, p: Point) -> Point {
        let d = p - self.position();
        let (s, c) = self.heading.sin_cos();
        Point::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }

    /// Map a point given in this pose's frame back to the world.
    pub fn to_world(&self, local: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        Point::new(
            self.x + c * local.x - s * local.y,
            self.y + s * local.x + c * local.y,
        )
    }

    /// Compose with a body-frame increment `(dx, dy, dtheta)`.
    pub fn compose(&self, dx: f64, dy: f64, dtheta: f64) -> Pose {
        let p = self.to_world(Point::new(dx, dy));
        Pose::new(p.x, p.y, self.heading + dtheta)
    }

    /// Body-frame increment that takes `self` to `next`.
    pub fn delta_to(&self, next: &Pose) -> (f64, f64, f64) {
        let local = self.to_local(next.position());
        (local.x, local.y, normalize_angle(next.heading - self.heading))
    }

    /// Point at polar `(distance, bearing)` in this pose's frame.
    pub fn polar_to_world(&self, distance: f64, bearing: f64) -> Point {
        let a = self.heading + bearing;
        Point::new(self.x + distance * a.cos(), self.y + distance * a.sin())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }
}

/// Egocentric goal vector in polar form. Bearing 0 is straight ahead,
/// positive to the left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GoalVector {
    pub distance: f64,
    pub bearing: f64,
}

pub fn goal_polar(pose: &Pose, goal: Point) -> GoalVector {
    let dx = goal.x - pose.x;
    let dy = goal.y - pose.y;
    let distance = dx.hypot(dy);
    let bearing = if distance == 0.0 {
        0.0
    } else {
        normalize_angle(dy.atan2(dx) - pose.heading)
    };
    GoalVector { distance, bearing }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Forward,
    #[serde(rename = "left")]
    TurnLeft,
    #[serde(rename = "right")]
    TurnRight,
    Done,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::Forward,
        Action::TurnLeft,
        Action::TurnRight,
        Action::Done,
    ];

    /// The three motion actions, in tie-break order.
    pub const MOTION: [Action; 3] = [Action::Forward, Action::TurnLeft, Action::TurnRight];

    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::TurnLeft => "left",
            Action::TurnRight => "right",
            Action::Done => "done",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action `{0}` (expected forward, left, right or done)")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Action::Forward),
            "left" => Ok(Action::TurnLeft),
            "right" => Ok(Action::TurnRight),
            "done" => Ok(Action::Done),
            other => Err(UnknownAction(other.to_string())),
        }
    }
}
