//! Belief-map action selection.
//!
//! For each candidate action the agent predicts where it will be after
//! several horizons, as a probability grid centred on itself and facing
//! right. The dot product of that grid with a grid of distances to the
//! goal is the expected future goal distance; the action with the smallest
//! weighted sum wins. The predictor here is a Monte-Carlo simulation on the
//! agent's own obstacle map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgentConfig, EpisodeContext, Observation, Policy, Privileged};
use crate::localization::Localizer;
use crate::locomotion::steer;
use crate::mapping::ObstacleMap;
use crate::world::{step, Action, AgentBody, DepthScan, GoalVector, KinematicsConfig, Point, Pose};

/// Floor applied to bin counts before normalizing, so empty cells keep a
/// tiny non-zero weight.
const COUNT_FLOOR: f64 = 1e-6;

/// Geometry shared by belief and measurement maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeliefGrid {
    pub rows: usize,
    pub cols: usize,
    /// Cell pitch, meters.
    pub pitch: f64,
}

impl Default for BeliefGrid {
    fn default() -> Self {
        Self {
            rows: 25,
            cols: 25,
            pitch: 0.2,
        }
    }
}

impl BeliefGrid {
    pub fn validate(&self) -> Result<(), String> {
        if self.rows % 2 == 0 || self.cols % 2 == 0 {
            return Err(format!("belief grid must have odd dimensions, got {}x{}", self.rows, self.cols));
        }
        if !(self.pitch > 0.0) {
            return Err("belief grid pitch must be positive".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self) -> (usize, usize) {
        (self.rows / 2, self.cols / 2)
    }

    /// Egocentric coordinates of a cell centre: x forward (to the right on
    /// the grid), y to the agent's left (up on the grid). Row 0 is the top.
    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        let (cr, cc) = self.center();
        Point::new(
            (col as f64 - cc as f64) * self.pitch,
            (cr as f64 - row as f64) * self.pitch,
        )
    }

    /// Cell containing an egocentric point, clamped to the border.
    pub fn cell_of(&self, local: Point) -> (usize, usize) {
        let (cr, cc) = self.center();
        let col = (local.x / self.pitch).round() as i64 + cc as i64;
        let row = cr as i64 - (local.y / self.pitch).round() as i64;
        (
            row.clamp(0, self.rows as i64 - 1) as usize,
            col.clamp(0, self.cols as i64 - 1) as usize,
        )
    }
}

/// Probability grid over the agent's future position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefMap {
    pub grid: BeliefGrid,
    /// Row-major weights, summing to one.
    pub weights: Vec<f64>,
}

impl BeliefMap {
    /// Normalize bin counts: each weight is the softmax of the log of the
    /// floored count, which reduces to `max(c, floor) / sum`.
    pub fn from_counts(grid: BeliefGrid, counts: &[u32]) -> Self {
        assert_eq!(counts.len(), grid.len());
        let logits: Vec<f64> = counts.iter().map(|&c| (c as f64).max(COUNT_FLOOR).ln()).collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let z: f64 = exp.iter().sum();
        Self {
            grid,
            weights: exp.into_iter().map(|e| e / z).collect(),
        }
    }

    pub fn one_hot(grid: BeliefGrid, row: usize, col: usize) -> Self {
        let mut weights = vec![0.0; grid.len()];
        weights[row * grid.cols + col] = 1.0;
        Self { grid, weights }
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.grid.cols + col]
    }

    /// Cell with the largest weight (first in row-major order on ties).
    pub fn mode(&self) -> (usize, usize) {
        let mut best = 0;
        for i in 1..self.weights.len() {
            if self.weights[i] > self.weights[best] {
                best = i;
            }
        }
        (best / self.grid.cols, best % self.grid.cols)
    }
}

/// Distance from every cell centre to the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementMap {
    pub grid: BeliefGrid,
    pub values: Vec<f64>,
}

impl MeasurementMap {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.cols + col]
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v + by).collect(),
        }
    }
}

pub fn measurement_map(goal: GoalVector, grid: BeliefGrid) -> MeasurementMap {
    let g = Point::new(goal.distance * goal.bearing.cos(), goal.distance * goal.bearing.sin());
    let mut values = Vec::with_capacity(grid.len());
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            values.push(grid.cell_center(r, c).distance(g));
        }
    }
    MeasurementMap { grid, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("belief grid {0:?} does not match measurement grid {1:?}")]
pub struct GeometryMismatch(pub (usize, usize), pub (usize, usize));

/// Expected goal distance under `belief`: the elementwise dot product.
pub fn expected_measurement(belief: &BeliefMap, mmap: &MeasurementMap) -> Result<f64, GeometryMismatch> {
    if belief.grid != mmap.grid || belief.weights.len() != mmap.values.len() {
        return Err(GeometryMismatch(
            (belief.grid.rows, belief.grid.cols),
            (mmap.grid.rows, mmap.grid.cols),
        ));
    }
    Ok(belief.weights.iter().zip(&mmap.values).map(|(w, m)| w * m).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutPolicy {
    /// Turn toward the goal, then drive at it.
    GreedyToGoal,
    /// Uniform over the three motions.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictorConfig {
    pub horizons: Vec<usize>,
    pub rollouts: usize,
    pub rollout_policy: RolloutPolicy,
    /// Chance that a greedy rollout step is replaced by a random motion.
    pub rollout_noise: f64,
    /// Cone half-angle of the greedy rollout policy, radians.
    pub rollout_phi: f64,
    /// Per-horizon weights; empty means uniform.
    pub horizon_weights: Vec<f64>,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            horizons: vec![1, 2, 4, 8, 12, 16],
            rollouts: 64,
            rollout_policy: RolloutPolicy::GreedyToGoal,
            rollout_noise: 0.1,
            rollout_phi: 15f64.to_radians(),
            horizon_weights: Vec::new(),
        }
    }
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.horizons.is_empty() || self.horizons.windows(2).any(|w| w[0] >= w[1]) || self.horizons[0] == 0 {
            return Err("horizons must be positive and strictly increasing".into());
        }
        if self.rollouts == 0 {
            return Err("at least one rollout is required".into());
        }
        if !self.horizon_weights.is_empty() && self.horizon_weights.len() != self.horizons.len() {
            return Err("one weight per horizon".into());
        }
        if !(0.0..=1.0).contains(&self.rollout_noise) {
            return Err("rollout_noise must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.horizon_weights.get(k).copied().unwrap_or(1.0)
    }
}

fn rollout_action(policy: RolloutPolicy, pose: &Pose, goal: Point, cfg: &PredictorConfig, rng: &mut ChaCha8Rng) -> Action {
    let random = match policy {
        RolloutPolicy::Random => true,
        RolloutPolicy::GreedyToGoal => cfg.rollout_noise > 0.0 && rng.random::<f64>() < cfg.rollout_noise,
    };
    if random {
        return Action::MOTION[rng.random_range(0..Action::MOTION.len())];
    }
    let d = goal - pose.position();
    steer(d.y.atan2(d.x) - pose.heading, cfg.rollout_phi)
}

/// One belief map per horizon for taking `action` now. Rollouts run on
/// `map` (unknown cells free) from `pose`; `goal` is in the same frame.
#[allow(clippy::too_many_arguments)]
pub fn predict_beliefs(
    map: &ObstacleMap,
    pose: &Pose,
    goal: Point,
    action: Action,
    cfg: &PredictorConfig,
    grid: BeliefGrid,
    kin: &KinematicsConfig,
    body: &AgentBody,
    rng: &mut ChaCha8Rng,
) -> Vec<BeliefMap> {
    let max_h = cfg.horizons.last().copied().unwrap_or(0);
    let mut counts = vec![vec![0u32; grid.len()]; cfg.horizons.len()];
    for _ in 0..cfg.rollouts {
        let mut p = *pose;
        let mut next_h = 0;
        for t in 1..=max_h {
            let a = if t == 1 {
                action
            } else {
                rollout_action(cfg.rollout_policy, &p, goal, cfg, rng)
            };
            p = step(map, &p, a, kin, body);
            if cfg.horizons[next_h] == t {
                let (r, c) = grid.cell_of(pose.to_local(p.position()));
                counts[next_h][r * grid.cols + c] += 1;
                next_h += 1;
            }
        }
    }
    counts.iter().map(|c| BeliefMap::from_counts(grid, c)).collect()
}

/// Weighted expected goal distance for each motion, in `Action::MOTION`
/// order.
#[allow(clippy::too_many_arguments)]
pub fn belief_scores(
    map: &ObstacleMap,
    pose: &Pose,
    goal: GoalVector,
    cfg: &PredictorConfig,
    grid: BeliefGrid,
    kin: &KinematicsConfig,
    body: &AgentBody,
    rng: &mut ChaCha8Rng,
) -> [f64; 3] {
    let mmap = measurement_map(goal, grid);
    let goal_point = pose.polar_to_world(goal.distance, goal.bearing);
    let mut scores = [0.0; 3];
    for (k, &a) in Action::MOTION.iter().enumerate() {
        let beliefs = predict_beliefs(map, pose, goal_point, a, cfg, grid, kin, body, rng);
        scores[k] = beliefs
            .iter()
            .enumerate()
            .map(|(h, b)| cfg.weight(h) * expected_measurement(b, &mmap).expect("same grid"))
            .sum();
    }
    scores
}

/// Index of the smallest score; earlier entries win ties.
pub(crate) fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    best
}

pub struct BeliefAgent {
    localizer: Localizer,
    map: ObstacleMap,
    predictor: PredictorConfig,
    grid: BeliefGrid,
    kin: KinematicsConfig,
    body: AgentBody,
    done_threshold: f64,
    rng: ChaCha8Rng,
    pose: Pose,
    last_scores: [f64; 3],
}

impl BeliefAgent {
    pub fn new(cfg: &AgentConfig, ctx: &EpisodeContext) -> Self {
        let cs = cfg.mapper.cell_size;
        let w = (ctx.extent_size.0 / cs).ceil() as usize;
        let h = (ctx.extent_size.1 / cs).ceil() as usize;
        Self {
            localizer: Localizer::new(cfg.localizer, ctx.start, ctx.seed ^ 0x10ca_112e),
            map: ObstacleMap::new(&cfg.mapper, ctx.extent_origin, w, h),
            predictor: cfg.predictor.clone(),
            grid: cfg.belief_grid,
            kin: ctx.kinematics,
            body: ctx.body,
            done_threshold: cfg.controller_for(ctx).done_threshold,
            rng: ChaCha8Rng::seed_from_u64(ctx.seed ^ 0xbe11_ef),
            pose: ctx.start,
            last_scores: [0.0; 3],
        }
    }

    /// Scores of Forward, TurnLeft and TurnRight at the last decision.
    pub fn last_scores(&self) -> [f64; 3] {
        self.last_scores
    }

    pub fn map(&self) -> &ObstacleMap {
        &self.map
    }
}

impl Policy for BeliefAgent {
    fn name(&self) -> &str {
        "belief"
    }

    fn act(&mut self, obs: &Observation, privileged: &Privileged) -> Action {
        let empty = DepthScan {
            fov: 0.0,
            ranges: Vec::new(),
            valid: Vec::new(),
            max_range: 0.0,
        };
        let scan = obs.depth.as_ref().unwrap_or(&empty);
        self.pose = self.localizer.observe(obs.odometry, scan, &self.map, &privileged.pose).pose;
        self.map.integrate_scan(&self.pose, scan);
        if obs.goal.distance < self.done_threshold {
            return Action::Done;
        }
        self.last_scores = belief_scores(
            &self.map,
            &self.pose,
            obs.goal,
            &self.predictor,
            self.grid,
            &self.kin,
            &self.body,
            &mut self.rng,
        );
        Action::MOTION[argmin(&self.last_scores)]
    }
}
