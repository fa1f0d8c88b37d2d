//! The modular pipeline: localize, map, plan with D* Lite, follow the path.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{blind_policy, AgentConfig, AgentStats, EpisodeContext, Observation, Policy, Privileged};
use crate::localization::{Localizer, PoseStatus};
use crate::locomotion::{Controller, ControllerConfig};
use crate::mapping::ObstacleMap;
use crate::planning::{nearest_traversable, DStarLite, PlanOptions, PlanTraceRow};
use crate::world::{Action, Cell, DepthScan, GridMap, MetricGrid, Point, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicConfig {
    /// Obstacles are grown by this many cells (Chebyshev) in the planner's
    /// view of the map. One cell covers the default body radius; with none,
    /// paths graze corners the body cannot pass.
    pub inflation: i32,
    /// Keep per-compute planner trace rows.
    pub trace: bool,
}

impl Default for ClassicConfig {
    fn default() -> Self {
        Self {
            inflation: 1,
            trace: false,
        }
    }
}

/// The obstacle map as the planner sees it: occupied cells and bump marks,
/// grown by the inflation radius. The agent's own cell is always free (the
/// body is standing in it) and inflation is waived right next to it, so a
/// slightly thickened wall cannot trap the start.
struct PlannerView<'a> {
    map: &'a ObstacleMap,
    bumps: &'a HashSet<Cell>,
    inflation: i32,
    agent: Cell,
}

impl PlannerView<'_> {
    fn occupied(&self, c: Cell) -> bool {
        self.map.is_occupied(c) || self.bumps.contains(&c)
    }
}

impl GridMap for PlannerView<'_> {
    fn width(&self) -> usize {
        self.map.width()
    }

    fn height(&self) -> usize {
        self.map.height()
    }

    fn is_blocked(&self, cell: Cell) -> bool {
        if cell == self.agent {
            return false;
        }
        if self.occupied(cell) {
            return true;
        }
        let r = self.inflation;
        cell.chebyshev(self.agent) > r && (-r..=r).any(|dy| (-r..=r).any(|dx| self.occupied(cell.offset(dx, dy))))
    }
}

pub struct ClassicAgent {
    name: String,
    localizer: Localizer,
    map: ObstacleMap,
    /// Cells marked as obstacles because a forward step made no progress.
    bumps: HashSet<Cell>,
    /// Agent cell the planner last saw.
    planned_from: Option<Cell>,
    last_action: Option<Action>,
    step_len: f64,
    body_radius: f64,
    /// Planners on the inflated and on the bare map.
    planners: [Option<DStarLite>; 2],
    plan_opts: PlanOptions,
    cfg: ClassicConfig,
    controller: Controller,
    blind: ControllerConfig,
    goal: Option<Point>,
    pose: Pose,
    stats: AgentStats,
    retired_expansions: u64,
    trace: Vec<PlanTraceRow>,
    path: Vec<Point>,
}

impl ClassicAgent {
    pub fn new(cfg: &AgentConfig, ctx: &EpisodeContext) -> Self {
        let cs = cfg.mapper.cell_size;
        let w = (ctx.extent_size.0 / cs).ceil() as usize;
        let h = (ctx.extent_size.1 / cs).ceil() as usize;
        let controller = cfg.controller_for(ctx);
        Self {
            name: cfg.label(),
            localizer: Localizer::new(cfg.localizer, ctx.start, ctx.seed ^ 0x10ca_112e),
            map: ObstacleMap::new(&cfg.mapper, ctx.extent_origin, w, h),
            bumps: HashSet::new(),
            planned_from: None,
            last_action: None,
            step_len: ctx.kinematics.step_len,
            body_radius: ctx.body.radius,
            planners: [None, None],
            plan_opts: cfg.planner,
            cfg: cfg.classic,
            controller: Controller::new(controller, ctx.seed ^ 0xc0_4701),
            blind: controller,
            goal: None,
            pose: ctx.start,
            stats: AgentStats::default(),
            retired_expansions: 0,
            trace: Vec::new(),
            path: Vec::new(),
        }
    }

    /// Start from `map` instead of an empty map, e.g. the revealed ground
    /// truth. It must cover the same extent.
    pub fn with_map(mut self, map: ObstacleMap) -> Self {
        self.map = map;
        self
    }

    pub fn map(&self) -> &ObstacleMap {
        &self.map
    }

    pub fn estimate(&self) -> Pose {
        self.pose
    }

    /// Goal position in the estimate frame.
    pub fn goal_estimate(&self) -> Option<Point> {
        self.goal
    }

    /// The path followed at the last tick, empty on fallback ticks.
    pub fn current_path(&self) -> &[Point] {
        &self.path
    }

    pub fn plan_trace(&self) -> &[PlanTraceRow] {
        &self.trace
    }

    fn on_failure(&mut self, obs: &Observation) {
        self.stats.localization_failures += 1;
        self.map.reset();
        self.bumps.clear();
        self.retire_planner();
        self.pose = self.localizer.current();
        self.goal = Some(self.pose.polar_to_world(obs.goal.distance, obs.goal.bearing));
        log::debug!("localization failure at step {}: map reset", obs.step_index);
    }

    fn retire_planner(&mut self) {
        for slot in &mut self.planners {
            if let Some(p) = slot.take() {
                self.retired_expansions += p.expansions();
            }
        }
    }

    /// Plan on the inflated map; if that has no path, plan again with
    /// inflation off. Accumulated pose error thickens walls, and with
    /// inflation on top narrow passages close up entirely.
    fn plan(&mut self, step: usize, changed: &[Cell]) -> Option<Vec<Point>> {
        let goal_point = self.goal?;
        let start = self.map.cell_of(self.pose.position());
        let goal = self.map.cell_of(goal_point);
        let moved_from = self.planned_from.replace(start).filter(|&c| c != start);
        if !self.map.in_bounds(start) || !self.map.in_bounds(goal) {
            return None;
        }
        let touched: Vec<Cell> = changed.iter().copied().chain(moved_from).chain([start]).collect();
        let strict = self.plan_on(STRICT, step, start, goal, goal_point, &touched);
        if strict.is_some() || self.cfg.inflation == 0 {
            if let Some(p) = self.planners[RELAXED].take() {
                self.retired_expansions += p.expansions();
            }
            return strict;
        }
        self.plan_on(RELAXED, step, start, goal, goal_point, &touched)
    }

    fn plan_on(&mut self, slot: usize, step: usize, start: Cell, goal: Cell, goal_point: Point, touched: &[Cell]) -> Option<Vec<Point>> {
        let r = if slot == STRICT { self.cfg.inflation } else { 0 };
        let view = PlannerView {
            map: &self.map,
            bumps: &self.bumps,
            inflation: r,
            agent: start,
        };
        if let Some(p) = self.planners[slot].as_mut() {
            let mut grown: Vec<Cell> = touched
                .iter()
                .flat_map(|c| (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| c.offset(dx, dy))))
                .collect();
            grown.sort_unstable();
            grown.dedup();
            p.update_cells(&view, &grown);
            if view.is_blocked(p.goal()) {
                if let Some(old) = self.planners[slot].take() {
                    self.retired_expansions += old.expansions();
                }
            }
        }
        let planner = match self.planners[slot].as_mut() {
            Some(p) => {
                p.set_start(start);
                p
            }
            None => {
                let g = reseed(&view, goal)?;
                self.planners[slot] = Some(DStarLite::new(&view, start, g, self.plan_opts).ok()?);
                self.planners[slot].as_mut().expect("just set")
            }
        };
        let path = planner.compute();
        if self.cfg.trace {
            self.trace.push(PlanTraceRow {
                step,
                expansions: planner.last_expansions(),
                cost: path.as_ref().map(|p| p.cost),
            });
        }
        let path = path?;
        let mut pts: Vec<Point> = path.cells.iter().map(|&c| self.map.cell_center(c)).collect();
        if planner.goal() == goal {
            *pts.last_mut().expect("path has the start cell") = goal_point;
        }
        Some(pts)
    }

    fn total_expansions(&self) -> u64 {
        self.retired_expansions + self.planners.iter().flatten().map(DStarLite::expansions).sum::<u64>()
    }
}

const STRICT: usize = 0;
const RELAXED: usize = 1;

/// A forward step that covers less than this fraction of the step length
/// counts as a bump.
const BUMP_FRACTION: f64 = 0.25;

fn reseed<G: GridMap>(view: &G, c: Cell) -> Option<Cell> {
    if view.is_blocked(c) {
        nearest_traversable(view, c)
    } else {
        Some(c)
    }
}

impl Policy for ClassicAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, obs: &Observation, privileged: &Privileged) -> Action {
        let empty;
        let scan = match &obs.depth {
            Some(s) => s,
            None => {
                empty = DepthScan {
                    fov: 0.0,
                    ranges: Vec::new(),
                    valid: Vec::new(),
                    max_range: 0.0,
                };
                &empty
            }
        };
        let est = self.localizer.observe(obs.odometry, scan, &self.map, &privileged.pose);
        let stalled = self.last_action == Some(Action::Forward)
            && obs.odometry.dx.hypot(obs.odometry.dy) < BUMP_FRACTION * self.step_len;
        if est.status == PoseStatus::Failure {
            self.on_failure(obs);
        } else {
            self.pose = est.pose;
        }
        if self.goal.is_none() {
            self.goal = Some(self.pose.polar_to_world(obs.goal.distance, obs.goal.bearing));
        }
        let mut changed = self.map.integrate_scan(&self.pose, scan);
        if stalled {
            let ahead = self.pose.polar_to_world(self.body_radius + 0.5 * self.map.cell_size(), 0.0);
            let c = self.map.cell_of(ahead);
            if self.bumps.insert(c) {
                changed.push(c);
            }
        }
        let bootstrapping = self.localizer.in_bootstrap(&self.map);
        let path = if bootstrapping { None } else { self.plan(obs.step_index, &changed) };
        self.stats.planner_expansions = self.total_expansions();
        let action = match path {
            Some(pts) => {
                self.controller.set_path(&pts, &self.pose);
                let a = self.controller.act(&self.pose, obs.goal.distance, &pts);
                self.path = pts;
                a
            }
            None => {
                self.stats.fallback_ticks += 1;
                self.path.clear();
                self.controller.clear();
                blind_policy(obs, &self.blind)
            }
        };
        self.last_action = Some(action);
        action
    }

    fn stats(&self) -> AgentStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::EpisodeContext;
    use crate::localization::{BodyDelta, LocalizerConfig};
    use crate::world::{goal_polar, raycast, step, AgentBody, KinematicsConfig, SensorConfig, WorldMap};

    fn ctx(world: &WorldMap, start: Pose) -> EpisodeContext {
        EpisodeContext {
            start,
            extent_origin: world.origin(),
            extent_size: (world.width() as f64 * 0.1, world.height() as f64 * 0.1),
            success_radius: 0.5,
            budget: 500,
            kinematics: KinematicsConfig::default(),
            body: AgentBody::default(),
            seed: 5,
        }
    }

    fn observe(world: &WorldMap, pose: &Pose, prev: &Pose, goal: Point, step: usize) -> Observation {
        Observation::new(
            Some(raycast(world, pose, &SensorConfig::default())),
            goal_polar(pose, goal),
            BodyDelta::between(prev, pose),
            None,
            step,
            500 - step,
        )
    }

    #[test]
    fn planner_view_frees_the_agent_cell_and_waives_inflation_beside_it() {
        let world = WorldMap::from_rows(0.1, &["#######", "#.....#", "#.#...#", "#.....#", "#######"]).unwrap();
        let map = ObstacleMap::revealed(&crate::mapping::MapperConfig::default(), &world);
        let mut bumps = HashSet::new();
        let pillar = world.cell_of(Point::new(0.25, 0.25));
        assert!(map.is_occupied(pillar));
        let beside = pillar.offset(1, 0);
        let view = |agent, bumps: &HashSet<Cell>| {
            let v = PlannerView { map: &map, bumps, inflation: 1, agent };
            (v.is_blocked(pillar), v.is_blocked(beside), v.is_blocked(Cell::new(4, 2)))
        };
        assert_eq!(view(Cell::new(5, 2), &bumps), (true, true, false));
        assert_eq!(view(beside.offset(1, 0), &bumps), (true, false, false));
        assert_eq!(view(pillar, &bumps), (false, false, false));
        bumps.insert(Cell::new(5, 1));
        assert_eq!(view(Cell::new(1, 3), &bumps), (true, true, true));
    }

    #[test]
    fn stalled_forward_marks_a_bump_and_replans() {
        let world = WorldMap::empty_room(0.1, 40, 40).unwrap();
        let start = Pose::new(2.0, 2.05, 0.0);
        let mut cfg = AgentConfig::classic(LocalizerConfig::perfect());
        cfg.controller.p_random = 0.0;
        let mut agent = ClassicAgent::new(&cfg, &ctx(&world, start));
        let goal = Point::new(3.5, 2.05);
        let first = agent.act(&observe(&world, &start, &start, goal, 0), &Privileged { pose: start });
        assert_eq!(first, Action::Forward);
        let before = agent.current_path().to_vec();
        // Pretend something invisible stopped the step.
        agent.act(&observe(&world, &start, &start, goal, 1), &Privileged { pose: start });
        assert_eq!(agent.bumps.len(), 1);
        let bump = *agent.bumps.iter().next().unwrap();
        assert_eq!(bump, world.cell_of(Point::new(2.15, 2.05)));
        let after = agent.current_path();
        assert_ne!(before, after);
        assert!(after.iter().all(|p| world.cell_of(*p) != bump));
    }

    #[test]
    fn failure_resets_map_and_still_acts() {
        let world = WorldMap::empty_room(0.1, 40, 40).unwrap();
        let start = Pose::new(2.0, 2.0, 0.0);
        let mut cfg = AgentConfig::classic(LocalizerConfig {
            bootstrap_min_occupied: 1,
            match_threshold: 1.0,
            ..LocalizerConfig::scan_matcher()
        });
        cfg.controller.p_random = 0.0;
        let mut agent = ClassicAgent::new(&cfg, &ctx(&world, start));
        let goal = Point::new(3.5, 2.0);
        let o = observe(&world, &start, &start, goal, 0);
        agent.act(&o, &Privileged { pose: start });
        assert!(agent.map().occupied_count() > 0);
        // A scan that matches nothing: everything is 0.35 m away.
        let mut o2 = o.clone();
        let scan = o2.depth.as_mut().unwrap();
        scan.ranges.iter_mut().for_each(|r| *r = 0.35);
        scan.valid.iter_mut().for_each(|v| *v = true);
        for (k, obs) in [&o2, &o].into_iter().enumerate() {
            let a = agent.act(obs, &Privileged { pose: start });
            assert!(Action::ALL.contains(&a));
            assert_eq!(agent.stats().localization_failures, k as u64 + 1);
        }
    }

    #[test]
    fn replans_around_a_wall_discovered_midway() {
        // Straight line to the goal is blocked by a wall with a gap at the top.
        let mut rows = vec!["#".repeat(50)];
        for y in 1..29 {
            let mut r: Vec<char> = std::iter::once('#').chain(std::iter::repeat_n('.', 48)).chain(std::iter::once('#')).collect();
            if y >= 6 {
                r[25] = '#';
            }
            rows.push(r.into_iter().collect());
        }
        rows.push("#".repeat(50));
        let refs: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
        let world = WorldMap::from_rows(0.1, &refs).unwrap();
        let start = Pose::new(1.0, 1.5, 0.0);
        let goal = Point::new(4.0, 1.5);
        let mut cfg = AgentConfig::classic(LocalizerConfig::perfect());
        cfg.controller.p_random = 0.0;
        let mut agent = ClassicAgent::new(&cfg, &ctx(&world, start));
        let (kin, body) = (KinematicsConfig::default(), AgentBody::default());
        let mut pose = start;
        let mut prev = start;
        let mut done = false;
        for t in 0..500 {
            let a = agent.act(&observe(&world, &pose, &prev, goal, t), &Privileged { pose });
            if a == Action::Done {
                done = true;
                break;
            }
            prev = pose;
            pose = step(&world, &pose, a, &kin, &body);
        }
        assert!(done);
        assert!(pose.position().distance(goal) < 0.5);
        assert_eq!(agent.stats().localization_failures, 0);
    }
}
