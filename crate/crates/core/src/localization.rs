//! Pose estimators for the classic pipeline.
//!
//! All estimators work in an estimate frame that coincides with the world
//! frame at the start of the episode. `Perfect` reads the true pose;
//! `Odometry` integrates noisy wheel-odometry increments; `ScanMatcher`
//! refines the odometry prediction by correlating the scan against the
//! agent's own obstacle map and reports `Failure` when nothing matches.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::mapping::{ObstacleMap, ENDPOINT_NUDGE};
use crate::world::{DepthScan, GridMap, MetricGrid, Point, Pose};

/// Executed motion since the previous tick, in the previous body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyDelta {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl BodyDelta {
    pub fn between(from: &Pose, to: &Pose) -> Self {
        let (dx, dy, dtheta) = from.delta_to(to);
        Self { dx, dy, dtheta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalizerKind {
    Perfect,
    #[serde(alias = "odom")]
    Odometry,
    #[serde(alias = "scanmatch")]
    ScanMatcher,
}

impl std::str::FromStr for LocalizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perfect" => Ok(Self::Perfect),
            "odom" | "odometry" => Ok(Self::Odometry),
            "scanmatch" | "scanmatcher" => Ok(Self::ScanMatcher),
            other => Err(format!("unknown localizer {other:?}")),
        }
    }
}

impl std::fmt::Display for LocalizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Perfect => "perfect",
            Self::Odometry => "odom",
            Self::ScanMatcher => "scanmatch",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizerConfig {
    pub kind: LocalizerKind,
    /// Per-step noise on each translational odometry component, meters.
    pub sigma_lin: f64,
    /// Per-step heading noise, radians.
    pub sigma_ang: f64,
    /// Search half-width in map cells along x and y.
    pub window_xy: i32,
    /// Search half-width in heading steps.
    pub window_theta: i32,
    pub theta_step: f64,
    /// Minimum fraction of endpoints on occupied cells for a match.
    pub match_threshold: f64,
    /// Map size (occupied cells) below which matching is skipped.
    pub bootstrap_min_occupied: usize,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self {
            kind: LocalizerKind::Perfect,
            sigma_lin: 0.01,
            sigma_ang: 0.5f64.to_radians(),
            window_xy: 2,
            window_theta: 2,
            theta_step: 1f64.to_radians(),
            match_threshold: 0.4,
            bootstrap_min_occupied: 20,
        }
    }
}

impl LocalizerConfig {
    pub fn perfect() -> Self {
        Self::default()
    }

    pub fn odometry(sigma_lin: f64, sigma_ang: f64) -> Self {
        Self {
            kind: LocalizerKind::Odometry,
            sigma_lin,
            sigma_ang,
            ..Self::default()
        }
    }

    pub fn scan_matcher() -> Self {
        Self {
            kind: LocalizerKind::ScanMatcher,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.sigma_lin >= 0.0 && self.sigma_ang >= 0.0) {
            return Err("odometry noise must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.match_threshold) {
            return Err("match_threshold must lie in [0, 1]".into());
        }
        if self.window_xy < 0 || self.window_theta < 0 {
            return Err("search window must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoseStatus {
    Ok,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    /// On `Failure`, the last successful estimate.
    pub pose: Pose,
    pub status: PoseStatus,
}

#[derive(Debug, Clone)]
pub struct Localizer {
    cfg: LocalizerConfig,
    current: Pose,
    last_ok: Pose,
    rng: ChaCha8Rng,
    lin: Normal<f64>,
    ang: Normal<f64>,
}

impl Localizer {
    pub fn new(cfg: LocalizerConfig, initial: Pose, seed: u64) -> Self {
        let lin = Normal::new(0.0, cfg.sigma_lin.max(0.0)).expect("finite sigma");
        let ang = Normal::new(0.0, cfg.sigma_ang.max(0.0)).expect("finite sigma");
        Self {
            cfg,
            current: initial,
            last_ok: initial,
            rng: ChaCha8Rng::seed_from_u64(seed),
            lin,
            ang,
        }
    }

    pub fn config(&self) -> &LocalizerConfig {
        &self.cfg
    }

    /// The running estimate. After a `Failure` this is the odometry
    /// continuation, which is what the pipeline re-seeds from.
    pub fn current(&self) -> Pose {
        self.current
    }

    /// Whether the matcher is still waiting for enough map to match
    /// against. Only the scan matcher has a bootstrap phase.
    pub fn in_bootstrap(&self, map: &ObstacleMap) -> bool {
        self.cfg.kind == LocalizerKind::ScanMatcher && map.occupied_count() < self.cfg.bootstrap_min_occupied
    }

    pub fn observe(&mut self, motion: BodyDelta, scan: &DepthScan, map: &ObstacleMap, gt_pose: &Pose) -> PoseEstimate {
        match self.cfg.kind {
            LocalizerKind::Perfect => {
                self.current = *gt_pose;
                self.ok(*gt_pose)
            }
            LocalizerKind::Odometry => {
                let p = self.predict(motion);
                self.current = p;
                self.ok(p)
            }
            LocalizerKind::ScanMatcher => {
                let predicted = self.predict(motion);
                self.current = predicted;
                if map.occupied_count() < self.cfg.bootstrap_min_occupied {
                    return self.ok(predicted);
                }
                let (best, score) = match_scan(map, scan, &predicted, &self.cfg);
                if score < self.cfg.match_threshold || scan.valid_count() == 0 {
                    PoseEstimate {
                        pose: self.last_ok,
                        status: PoseStatus::Failure,
                    }
                } else {
                    self.current = best;
                    self.ok(best)
                }
            }
        }
    }

    fn ok(&mut self, pose: Pose) -> PoseEstimate {
        self.last_ok = pose;
        PoseEstimate {
            pose,
            status: PoseStatus::Ok,
        }
    }

    fn predict(&mut self, m: BodyDelta) -> Pose {
        let dx = m.dx + self.lin.sample(&mut self.rng);
        let dy = m.dy + self.lin.sample(&mut self.rng);
        let dt = m.dtheta + self.ang.sample(&mut self.rng);
        self.current.compose(dx, dy, dt)
    }
}

/// Exhaustive search over the pose window around `predicted`. Returns the
/// best pose and its score: the fraction of valid endpoints that land on
/// occupied cells. Ties keep the candidate closest to the prediction
/// (search order is by increasing offset magnitude).
pub fn match_scan(map: &ObstacleMap, scan: &DepthScan, predicted: &Pose, cfg: &LocalizerConfig) -> (Pose, f64) {
    let rays: Vec<(f64, f64)> = scan.valid_rays().map(|(off, r)| (off, r + ENDPOINT_NUDGE)).collect();
    if rays.is_empty() {
        return (*predicted, 0.0);
    }
    let s = map.cell_size();
    let mut offsets: Vec<(i32, i32, i32)> = Vec::new();
    for k in -cfg.window_theta..=cfg.window_theta {
        for j in -cfg.window_xy..=cfg.window_xy {
            for i in -cfg.window_xy..=cfg.window_xy {
                offsets.push((i, j, k));
            }
        }
    }
    offsets.sort_by_key(|&(i, j, k)| (i * i + j * j + k * k, k.abs(), j.abs(), i.abs()));

    let mut best = (*predicted, -1.0);
    let mut local: Vec<Point> = Vec::with_capacity(rays.len());
    let mut cached_k = None;
    for (i, j, k) in offsets {
        if cached_k != Some(k) {
            let heading = predicted.heading + k as f64 * cfg.theta_step;
            local.clear();
            local.extend(rays.iter().map(|&(off, r)| {
                let a = heading + off;
                Point::new(r * a.cos(), r * a.sin())
            }));
            cached_k = Some(k);
        }
        let cx = predicted.x + i as f64 * s;
        let cy = predicted.y + j as f64 * s;
        let hits = local
            .iter()
            .filter(|p| map.is_blocked(map.cell_of(Point::new(cx + p.x, cy + p.y))))
            .count();
        let score = hits as f64 / rays.len() as f64;
        if score > best.1 {
            best = (Pose::new(cx, cy, predicted.heading + k as f64 * cfg.theta_step), score);
        }
    }
    best
}

/// One line of the per-step pose log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseLogRow {
    pub step: usize,
    pub est_x: f64,
    pub est_y: f64,
    pub est_theta: f64,
    pub gt_x: f64,
    pub gt_y: f64,
    pub gt_theta: f64,
    pub status: PoseStatus,
}

impl PoseLogRow {
    pub fn new(step: usize, est: &PoseEstimate, gt: &Pose) -> Self {
        Self {
            step,
            est_x: est.pose.x,
            est_y: est.pose.y,
            est_theta: est.pose.heading,
            gt_x: gt.x,
            gt_y: gt.y,
            gt_theta: gt.heading,
            status: est.status,
        }
    }
}

pub fn write_pose_log<W: Write>(rows: &[PoseLogRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::MapperConfig;
    use crate::world::{generate_map, raycast, spawn_cells, step, Action, AgentBody, GeneratorConfig, KinematicsConfig, SensorConfig, WorldMap};
    use rand::Rng;

    #[test]
    fn perfect_returns_ground_truth() {
        let map = ObstacleMap::new(&MapperConfig::default(), Point::new(0.0, 0.0), 10, 10);
        let mut loc = Localizer::new(LocalizerConfig::perfect(), Pose::default(), 1);
        let gt = Pose::new(3.0, -1.0, 2.0);
        let scan = DepthScan::empty(&SensorConfig::default());
        let est = loc.observe(BodyDelta::default(), &scan, &map, &gt);
        assert_eq!(est, PoseEstimate { pose: gt, status: PoseStatus::Ok });
    }

    #[test]
    fn noiseless_odometry_tracks_truth() {
        let world = WorldMap::empty_room(0.1, 40, 40).unwrap();
        let kin = KinematicsConfig::default();
        let body = AgentBody::default();
        let map = ObstacleMap::covering(&MapperConfig::default(), &world);
        let scan = DepthScan::empty(&SensorConfig::default());
        let mut gt = Pose::new(2.0, 2.0, 0.4);
        let mut loc = Localizer::new(LocalizerConfig::odometry(0.0, 0.0), gt, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let a = Action::MOTION[rng.random_range(0..3)];
            let next = step(&world, &gt, a, &kin, &body);
            let est = loc.observe(BodyDelta::between(&gt, &next), &scan, &map, &Pose::default());
            gt = next;
            assert!(est.pose.position().distance(gt.position()) < 1e-9);
            assert!((est.pose.heading - gt.heading).abs() < 1e-9);
        }
    }

    #[test]
    fn matcher_fails_when_nothing_lines_up() {
        let cfg = MapperConfig::default();
        let mut map = ObstacleMap::new(&cfg, Point::new(0.0, 0.0), 60, 60);
        let world = WorldMap::empty_room(0.1, 60, 60).unwrap();
        let corner = Pose::new(1.0, 1.0, -2.4);
        map.integrate_scan(&corner, &raycast(&world, &corner, &SensorConfig::default()));
        assert!(map.occupied_count() >= 5);
        // A scan of a wall 1 m ahead, taken from the middle of the room.
        let scan = DepthScan {
            fov: 0.2,
            ranges: vec![1.0; 16],
            valid: vec![true; 16],
            max_range: 4.0,
        };
        let cfg = LocalizerConfig { bootstrap_min_occupied: 5, ..LocalizerConfig::scan_matcher() };
        let mut loc = Localizer::new(cfg, Pose::new(3.0, 3.0, 0.0), 0);
        let est = loc.observe(BodyDelta::default(), &scan, &map, &Pose::default());
        assert_eq!(est.status, PoseStatus::Failure);
        assert_eq!(est.pose, Pose::new(3.0, 3.0, 0.0));
    }

    #[test]
    fn matcher_skips_matching_during_bootstrap() {
        let map = ObstacleMap::new(&MapperConfig::default(), Point::new(0.0, 0.0), 60, 60);
        let scan = DepthScan {
            fov: 0.2,
            ranges: vec![1.0; 16],
            valid: vec![true; 16],
            max_range: 4.0,
        };
        let mut loc = Localizer::new(LocalizerConfig::scan_matcher(), Pose::new(3.0, 3.0, 0.0), 0);
        assert_eq!(loc.observe(BodyDelta::default(), &scan, &map, &Pose::default()).status, PoseStatus::Ok);
    }

    #[test]
    fn matcher_recovers_true_cell_on_random_fixtures() {
        let sensor = SensorConfig::default();
        let cfg = LocalizerConfig::scan_matcher();
        for seed in 0..40u64 {
            let world = generate_map(seed, &GeneratorConfig::furnished()).unwrap();
            let cells = spawn_cells(&world);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = cells[rng.random_range(0..cells.len())];
            let p = world.cell_center(c);
            let truth = Pose::new(p.x, p.y, rng.random_range(-3.0..3.0));
            let map = ObstacleMap::revealed(&MapperConfig::default(), &world);
            let scan = raycast(&world, &truth, &sensor);
            let (best, score) = match_scan(&map, &scan, &truth, &cfg);
            assert_eq!(world.cell_of(best.position()), c, "seed {seed}");
            assert_eq!(score, 1.0, "seed {seed}");
        }
    }

    #[test]
    fn pose_log_has_header_and_rows() {
        let est = PoseEstimate { pose: Pose::new(1.0, 2.0, 0.5), status: PoseStatus::Failure };
        let mut buf = Vec::new();
        write_pose_log(&[PoseLogRow::new(4, &est, &Pose::default())], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "step,est_x,est_y,est_theta,gt_x,gt_y,gt_theta,status");
        assert!(text.lines().nth(1).unwrap().ends_with(",Failure"));
    }

    #[test]
    fn config_validation() {
        assert!(LocalizerConfig::default().validate().is_ok());
        let bad = LocalizerConfig { match_threshold: 1.5, ..LocalizerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = LocalizerConfig { sigma_lin: -0.1, ..LocalizerConfig::default() };
        assert!(bad.validate().is_err());
    }
}
