use serde::{Deserialize, Serialize};

use super::grid::{Cell, MetricGrid};
use super::pose::{Action, Point, Pose};

/// Cylinder approximation of the agent. Only the radius matters in the
/// planar world; height is carried along for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentBody {
    pub radius: f64,
    pub height: f64,
}

impl Default for AgentBody {
    fn default() -> Self {
        Self {
            radius: 0.1,
            height: 1.09,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionMode {
    /// Advance until contact, then stop.
    Stop,
    /// Advance until contact, then continue along the obstacle surface
    /// with the blocked component removed.
    Slide,
}

/// Per-action displacement. The defaults (0.10 m, 10°) are conventions:
/// 500 actions then cover roughly 50 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KinematicsConfig {
    pub step_len: f64,
    pub turn_step: f64,
    pub collision_mode: CollisionMode,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self {
            step_len: 0.10,
            turn_step: 10f64.to_radians(),
            collision_mode: CollisionMode::Slide,
        }
    }
}

/// Gap left between the disc and the obstacle it stopped against.
const CONTACT_GAP: f64 = 1e-7;

/// Apply one action. Motion is resolved against blocked cells of `grid`;
/// the result never overlaps a blocked cell if the input did not.
pub fn step<G: MetricGrid + ?Sized>(
    grid: &G,
    pose: &Pose,
    action: Action,
    cfg: &KinematicsConfig,
    body: &AgentBody,
) -> Pose {
    match action {
        Action::Done => *pose,
        Action::TurnLeft => pose.rotated(cfg.turn_step),
        Action::TurnRight => pose.rotated(-cfg.turn_step),
        Action::Forward => {
            let dir = pose.direction();
            let start = pose.position();
            let (reached, hit) = advance(grid, start, dir, cfg.step_len, body.radius);
            let end = match (cfg.collision_mode, hit) {
                (CollisionMode::Slide, Some(cell)) => {
                    let remaining = cfg.step_len - reached.distance(start);
                    slide(grid, reached, dir, remaining, cell, body.radius)
                }
                _ => reached,
            };
            pose.with_position(end)
        }
    }
}

fn slide<G: MetricGrid + ?Sized>(
    grid: &G,
    at: Point,
    dir: Point,
    remaining: f64,
    contact: Cell,
    radius: f64,
) -> Point {
    if remaining <= 0.0 {
        return at;
    }
    let (lo, hi) = cell_bounds(grid, contact);
    let closest = Point::new(at.x.clamp(lo.x, hi.x), at.y.clamp(lo.y, hi.y));
    let away = at - closest;
    let len = away.norm();
    if len == 0.0 {
        return at;
    }
    let normal = away.scale(1.0 / len);
    let rem = dir.scale(remaining);
    let tangent = rem - normal.scale(rem.dot(normal).min(0.0));
    let t_len = tangent.norm();
    if t_len < 1e-12 {
        return at;
    }
    advance(grid, at, tangent.scale(1.0 / t_len), t_len, radius).0
}

/// Move from `from` along unit `dir` for up to `len`, stopping at first
/// contact. Returns the final point and the cell that was hit, if any.
fn advance<G: MetricGrid + ?Sized>(
    grid: &G,
    from: Point,
    dir: Point,
    len: f64,
    radius: f64,
) -> (Point, Option<Cell>) {
    let (t_hit, cell) = contact_distance(grid, from, dir, len, radius);
    if t_hit >= len {
        let end = from + dir.scale(len);
        if !disc_collides_new(grid, from, end, radius) {
            return (end, None);
        }
    }
    let mut t = (t_hit.min(len) - CONTACT_GAP).max(0.0);
    while t > 0.0 && disc_collides_new(grid, from, from + dir.scale(t), radius) {
        t = if t < 1e-9 { 0.0 } else { t * 0.5 };
    }
    (from + dir.scale(t), cell)
}

fn cell_bounds<G: MetricGrid + ?Sized>(grid: &G, c: Cell) -> (Point, Point) {
    let s = grid.cell_size();
    let o = grid.origin();
    let lo = Point::new(o.x + c.x as f64 * s, o.y + c.y as f64 * s);
    (lo, Point::new(lo.x + s, lo.y + s))
}

fn sq_dist_to_cell<G: MetricGrid + ?Sized>(grid: &G, p: Point, c: Cell) -> f64 {
    let (lo, hi) = cell_bounds(grid, c);
    let dx = p.x - p.x.clamp(lo.x, hi.x);
    let dy = p.y - p.y.clamp(lo.y, hi.y);
    dx * dx + dy * dy
}

fn cells_around<G: MetricGrid + ?Sized>(grid: &G, a: Point, b: Point, r: f64) -> impl Iterator<Item = Cell> {
    let lo = grid.cell_of(Point::new(a.x.min(b.x) - r, a.y.min(b.y) - r));
    let hi = grid.cell_of(Point::new(a.x.max(b.x) + r, a.y.max(b.y) + r));
    (lo.y..=hi.y).flat_map(move |y| (lo.x..=hi.x).map(move |x| Cell::new(x, y)))
}

/// Whether a disc at `center` overlaps any blocked cell (touching allowed).
pub fn disc_collides<G: MetricGrid + ?Sized>(grid: &G, center: Point, radius: f64) -> bool {
    let r2 = radius * radius;
    cells_around(grid, center, center, radius)
        .any(|c| grid.is_blocked(c) && sq_dist_to_cell(grid, center, c) < r2)
}

/// Like [`disc_collides`] but ignores cells the disc already overlapped at
/// `origin`, so an agent that starts inside an obstacle can move out.
fn disc_collides_new<G: MetricGrid + ?Sized>(grid: &G, origin: Point, center: Point, radius: f64) -> bool {
    let r2 = radius * radius;
    cells_around(grid, center, center, radius).any(|c| {
        grid.is_blocked(c) && sq_dist_to_cell(grid, center, c) < r2 && sq_dist_to_cell(grid, origin, c) >= r2
    })
}

/// Closed-form travel distance along unit `dir` before a disc of `radius`
/// starting at `from` touches a blocked cell, looking no further than
/// `max_len`. Returns `(f64::INFINITY, None)` when the sweep is clear.
///
/// Each blocked cell, inflated by the radius, is a rounded rectangle: two
/// slabs plus four corner circles. The entry time into the union is the
/// minimum entry time over those convex pieces.
pub fn contact_distance<G: MetricGrid + ?Sized>(
    grid: &G,
    from: Point,
    dir: Point,
    max_len: f64,
    radius: f64,
) -> (f64, Option<Cell>) {
    let to = from + dir.scale(max_len);
    let r2 = radius * radius;
    let mut best = (f64::INFINITY, None);
    for c in cells_around(grid, from, to, radius) {
        if !grid.is_blocked(c) || sq_dist_to_cell(grid, from, c) < r2 {
            continue;
        }
        let (lo, hi) = cell_bounds(grid, c);
        let mut t = f64::INFINITY;
        t = t.min(ray_box(from, dir, Point::new(lo.x - radius, lo.y), Point::new(hi.x + radius, hi.y)));
        t = t.min(ray_box(from, dir, Point::new(lo.x, lo.y - radius), Point::new(hi.x, hi.y + radius)));
        for corner in [lo, hi, Point::new(lo.x, hi.y), Point::new(hi.x, lo.y)] {
            t = t.min(ray_circle(from, dir, corner, radius));
        }
        if t < best.0 {
            best = (t, Some(c));
        }
    }
    best
}

/// Entry parameter of a ray into the open box `(lo, hi)`, or infinity.
fn ray_box(o: Point, d: Point, lo: Point, hi: Point) -> f64 {
    let mut enter = f64::NEG_INFINITY;
    let mut exit = f64::INFINITY;
    for (oc, dc, l, h) in [(o.x, d.x, lo.x, hi.x), (o.y, d.y, lo.y, hi.y)] {
        if dc == 0.0 {
            if oc <= l || oc >= h {
                return f64::INFINITY;
            }
        } else {
            let (t1, t2) = ((l - oc) / dc, (h - oc) / dc);
            enter = enter.max(t1.min(t2));
            exit = exit.min(t1.max(t2));
        }
    }
    if enter < exit && exit > 0.0 {
        enter.max(0.0)
    } else {
        f64::INFINITY
    }
}

fn ray_circle(o: Point, d: Point, c: Point, r: f64) -> f64 {
    let oc = o - c;
    let b = oc.dot(d);
    let c0 = oc.dot(oc) - r * r;
    let disc = b * b - c0;
    if disc <= 0.0 {
        return f64::INFINITY;
    }
    let s = disc.sqrt();
    let (t1, t2) = (-b - s, -b + s);
    if t2 > 0.0 {
        t1.max(0.0)
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::WorldMap;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn room() -> WorldMap {
        WorldMap::empty_room(0.1, 40, 40).unwrap()
    }

    #[test]
    fn forward_in_open_space() {
        let m = room();
        let p = step(&m, &Pose::new(1.0, 1.0, 0.0), Action::Forward, &KinematicsConfig::default(), &AgentBody::default());
        assert!((p.x - 1.1).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12 && p.heading == 0.0);
    }

    #[test]
    fn turns_rotate_only() {
        let m = room();
        let cfg = KinematicsConfig::default();
        let p = step(&m, &Pose::new(1.0, 1.0, 0.0), Action::TurnLeft, &cfg, &AgentBody::default());
        assert_eq!((p.x, p.y), (1.0, 1.0));
        assert!((p.heading - 10f64.to_radians()).abs() < 1e-12);
        let p = step(&m, &p, Action::TurnRight, &cfg, &AgentBody::default());
        assert!(p.heading.abs() < 1e-12);
        let d = step(&m, &p, Action::Done, &cfg, &AgentBody::default());
        assert_eq!(d, p);
    }

    /// Numerical reference: march in tiny steps until the disc overlaps.
    fn marched_contact(m: &WorldMap, from: Point, dir: Point, len: f64, r: f64) -> f64 {
        let n = 200_000;
        for i in 0..=n {
            let t = len * i as f64 / n as f64;
            if disc_collides(m, from + dir.scale(t), r) {
                return t;
            }
        }
        f64::INFINITY
    }

    #[test]
    fn stop_mode_halts_at_contact() {
        // Wall face 0.05 m ahead of the disc edge.
        let m = room();
        let wall_x = 3.9; // inner face of the east border
        let start = Pose::new(wall_x - 0.1 - 0.05, 2.0, 0.0);
        let cfg = KinematicsConfig {
            collision_mode: CollisionMode::Stop,
            ..Default::default()
        };
        let p = step(&m, &start, Action::Forward, &cfg, &AgentBody::default());
        let reference = marched_contact(&m, start.position(), start.direction(), 0.1, 0.1);
        assert!((reference - 0.05).abs() < 1e-5);
        assert!((p.x - start.x - 0.05).abs() < 1e-5, "{p:?}");
        assert!(!disc_collides(&m, p.position(), 0.1));
    }

    #[test]
    fn closed_form_matches_marching() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut occ = vec![false; 30 * 30];
        for y in 0..30 {
            for x in 0..30 {
                occ[y * 30 + x] = x == 0 || y == 0 || x == 29 || y == 29 || rng.random_bool(0.15);
            }
        }
        let m = WorldMap::new(0.1, 30, 30, occ).unwrap();
        let mut checked = 0;
        while checked < 60 {
            let from = Point::new(rng.random_range(0.2..2.8), rng.random_range(0.2..2.8));
            if disc_collides(&m, from, 0.1) {
                continue;
            }
            let a: f64 = rng.random_range(-3.14..3.14);
            let dir = Point::new(a.cos(), a.sin());
            let (t, _) = contact_distance(&m, from, dir, 0.5, 0.1);
            let reference = marched_contact(&m, from, dir, 0.5, 0.1);
            if t.is_finite() || reference.is_finite() {
                assert!((t - reference).abs() < 1e-5, "closed {t} vs marched {reference}");
            }
            checked += 1;
        }
    }

    #[test]
    fn slide_keeps_tangential_motion() {
        let m = room();
        let start = Pose::new(3.9 - 0.1 - 0.01, 2.0, 45f64.to_radians());
        let p = step(&m, &start, Action::Forward, &KinematicsConfig::default(), &AgentBody::default());
        assert!(p.y - start.y > 0.06, "{p:?}");
        assert!(p.x <= 3.8 + 1e-9);
        let stop = KinematicsConfig {
            collision_mode: CollisionMode::Stop,
            ..Default::default()
        };
        let q = step(&m, &start, Action::Forward, &stop, &AgentBody::default());
        assert!(q.y - start.y < 0.02);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_walks_never_penetrate(seed in 0u64..10_000, slide in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut occ = vec![false; 25 * 25];
            for y in 0..25 {
                for x in 0..25 {
                    occ[y * 25 + x] = x == 0 || y == 0 || x == 24 || y == 24 || rng.random_bool(0.2);
                }
            }
            let m = WorldMap::new(0.1, 25, 25, occ).unwrap();
            let body = AgentBody::default();
            let cfg = KinematicsConfig {
                collision_mode: if slide { CollisionMode::Slide } else { CollisionMode::Stop },
                ..Default::default()
            };
            let mut pose = loop {
                let p = Pose::new(rng.random_range(0.1..2.4), rng.random_range(0.1..2.4), rng.random_range(-3.0..3.0));
                if !disc_collides(&m, p.position(), body.radius) {
                    break p;
                }
            };
            for _ in 0..200 {
                let a = Action::MOTION[rng.random_range(0..3)];
                let a = if rng.random_bool(0.6) { Action::Forward } else { a };
                pose = step(&m, &pose, a, &cfg, &body);
                prop_assert!(!disc_collides(&m, pose.position(), body.radius), "penetrated at {:?}", pose);
            }
        }
    }
}
