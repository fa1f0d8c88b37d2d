use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::scenario::LoadedScenario;
use crate::agents::{EpisodeContext, Observation, Policy, Privileged};
use crate::localization::BodyDelta;
use crate::world::{goal_polar, raycast, step, Action, AgentBody, GridMap, KinematicsConfig, MetricGrid, Pose, SensorConfig, WorldMap};

/// Simulator settings shared by every episode of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub kinematics: KinematicsConfig,
    pub body: AgentBody,
    pub sensor: SensorConfig,
    /// Success needs an explicit Done inside the radius. When false, an
    /// episode that runs out of budget inside the radius also succeeds.
    pub done_required: bool,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            kinematics: KinematicsConfig::default(),
            body: AgentBody::default(),
            sensor: SensorConfig::default(),
            done_required: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndReason {
    Reached,
    TimedOut,
    DoneOutsideRadius,
    AgentFault,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub step: usize,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Action taken from this pose; empty on the final row.
    pub action: Option<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario_id: String,
    pub agent: String,
    pub success: bool,
    /// Oracle shortest path length, meters.
    pub shortest: f64,
    /// Distance actually travelled, meters.
    pub path_length: f64,
    /// Actions taken before Done (or the whole budget).
    pub steps: usize,
    pub budget: usize,
    /// Fraction of the budget used; 1 for failures.
    pub time_fraction: f64,
    pub reason: EndReason,
    pub trajectory: Vec<TrajectoryStep>,
}

impl EpisodeResult {
    /// This episode's SPL term.
    pub fn spl_term(&self) -> f64 {
        if self.success {
            self.shortest / self.shortest.max(self.path_length)
        } else {
            0.0
        }
    }

    pub fn pace_term(&self) -> f64 {
        1.0 - self.time_fraction
    }
}

/// Sum of displacements between consecutive trajectory positions.
pub fn trajectory_length(traj: &[TrajectoryStep]) -> f64 {
    traj.windows(2)
        .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
        .sum()
}

/// Turn-based simulator for one episode. Agents and remote clients drive
/// it the same way: read `observation`, then `apply` one action.
#[derive(Debug, Clone)]
pub struct EpisodeRunner {
    world: Arc<WorldMap>,
    task: LoadedScenario,
    cfg: WorldConfig,
    agent: String,
    pose: Pose,
    odometry: BodyDelta,
    prev_action: Option<Action>,
    steps: usize,
    path_length: f64,
    trajectory: Vec<TrajectoryStep>,
    result: Option<EpisodeResult>,
}

impl EpisodeRunner {
    pub fn new(task: &LoadedScenario, cfg: &WorldConfig, agent: impl Into<String>) -> Self {
        let pose = task.scenario.start();
        Self {
            world: task.world.clone(),
            task: task.clone(),
            cfg: *cfg,
            agent: agent.into(),
            pose,
            odometry: BodyDelta::default(),
            prev_action: None,
            steps: 0,
            path_length: 0.0,
            trajectory: vec![TrajectoryStep {
                step: 0,
                x: pose.x,
                y: pose.y,
                theta: pose.heading,
                action: None,
            }],
            result: None,
        }
    }

    /// What an agent built for this episode is told up front.
    pub fn context(&self) -> EpisodeContext {
        let s = self.world.cell_size();
        EpisodeContext {
            start: self.task.scenario.start(),
            extent_origin: self.world.origin(),
            extent_size: (self.world.width() as f64 * s, self.world.height() as f64 * s),
            success_radius: self.task.scenario.radius,
            budget: self.task.scenario.budget,
            kinematics: self.cfg.kinematics,
            body: self.cfg.body,
            seed: self.task.scenario.seed,
        }
    }

    pub fn scenario(&self) -> &LoadedScenario {
        &self.task
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn step_index(&self) -> usize {
        self.steps
    }

    pub fn budget_left(&self) -> usize {
        self.task.scenario.budget - self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.result.is_some()
    }

    pub fn result(&self) -> Option<&EpisodeResult> {
        self.result.as_ref()
    }

    pub fn observation(&self) -> Observation {
        let scan = raycast(self.world.as_ref(), &self.pose, &self.cfg.sensor);
        Observation::new(
            Some(scan),
            goal_polar(&self.pose, self.task.scenario.goal()),
            self.odometry,
            self.prev_action,
            self.steps,
            self.budget_left(),
        )
    }

    pub fn privileged(&self) -> Privileged {
        Privileged { pose: self.pose }
    }

    /// Advance the world by one action. Returns the result once the
    /// episode is over; actions after that are ignored.
    pub fn apply(&mut self, action: Action) -> Option<&EpisodeResult> {
        if self.result.is_some() {
            return self.result.as_ref();
        }
        self.trajectory.last_mut().expect("start row").action = Some(action);
        if action == Action::Done {
            let inside = self.inside_radius();
            let reason = if inside { EndReason::Reached } else { EndReason::DoneOutsideRadius };
            return Some(self.finish(inside, reason));
        }
        let next = step(self.world.as_ref(), &self.pose, action, &self.cfg.kinematics, &self.cfg.body);
        self.odometry = BodyDelta::between(&self.pose, &next);
        self.path_length += next.position().distance(self.pose.position());
        self.pose = next;
        self.prev_action = Some(action);
        self.steps += 1;
        self.trajectory.push(TrajectoryStep {
            step: self.steps,
            x: next.x,
            y: next.y,
            theta: next.heading,
            action: None,
        });
        if self.steps >= self.task.scenario.budget {
            let success = !self.cfg.done_required && self.inside_radius();
            let reason = if success { EndReason::Reached } else { EndReason::TimedOut };
            return Some(self.finish(success, reason));
        }
        None
    }

    /// End the episode because the agent crashed.
    pub fn abort(&mut self) -> &EpisodeResult {
        if self.result.is_none() {
            self.finish(false, EndReason::AgentFault);
        }
        self.result.as_ref().expect("set")
    }

    fn inside_radius(&self) -> bool {
        self.pose.position().distance(self.task.scenario.goal()) <= self.task.scenario.radius
    }

    fn finish(&mut self, success: bool, reason: EndReason) -> &EpisodeResult {
        let budget = self.task.scenario.budget;
        let time_fraction = if success { self.steps as f64 / budget as f64 } else { 1.0 };
        self.result = Some(EpisodeResult {
            scenario_id: self.task.scenario.id.clone(),
            agent: self.agent.clone(),
            success,
            shortest: self.task.shortest,
            path_length: trajectory_length(&self.trajectory),
            steps: self.steps,
            budget,
            time_fraction,
            reason,
            trajectory: std::mem::take(&mut self.trajectory),
        });
        self.result.as_ref().expect("just set")
    }
}

/// Run one episode to completion. A panicking agent ends the episode as
/// a failure with reason `AgentFault`.
pub fn run_episode(agent: &mut dyn Policy, task: &LoadedScenario, cfg: &WorldConfig) -> EpisodeResult {
    let name = agent.name().to_string();
    let mut runner = EpisodeRunner::new(task, cfg, name);
    loop {
        let obs = runner.observation();
        let privileged = runner.privileged();
        let action = match catch_unwind(AssertUnwindSafe(|| agent.act(&obs, &privileged))) {
            Ok(a) => a,
            Err(e) => {
                let msg = e
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| e.downcast_ref::<String>().cloned())
                    .unwrap_or_default();
                log::warn!("agent {} failed on {}: {msg}", agent.name(), task.scenario.id);
                return runner.abort().clone();
            }
        };
        if let Some(r) = runner.apply(action) {
            return r.clone();
        }
    }
}

/// Replay a fixed action list; `Done` is appended if the list runs out
/// before the episode ends.
pub fn replay_actions(task: &LoadedScenario, cfg: &WorldConfig, agent: &str, actions: &[Action]) -> EpisodeResult {
    let mut runner = EpisodeRunner::new(task, cfg, agent);
    for &a in actions.iter().chain(std::iter::once(&Action::Done)) {
        if let Some(r) = runner.apply(a) {
            return r.clone();
        }
    }
    unreachable!("Done always ends the episode")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentConfig, AgentStats};
    use crate::harness::Scenario;

    fn room_task(start: Pose, goal: (f64, f64), budget: usize) -> LoadedScenario {
        let world = Arc::new(WorldMap::empty_room(0.1, 60, 60).unwrap());
        let s = Scenario {
            id: "room".into(),
            map: "room.txt".into(),
            start_x: start.x,
            start_y: start.y,
            start_theta: start.heading,
            goal_x: goal.0,
            goal_y: goal.1,
            budget,
            radius: 0.5,
            seed: 3,
        };
        LoadedScenario::new(s, world, &AgentBody::default()).unwrap()
    }

    struct Spinner;
    impl Policy for Spinner {
        fn name(&self) -> &str {
            "spinner"
        }
        fn act(&mut self, _: &Observation, _: &Privileged) -> Action {
            Action::TurnLeft
        }
    }

    struct Quitter;
    impl Policy for Quitter {
        fn name(&self) -> &str {
            "quitter"
        }
        fn act(&mut self, _: &Observation, _: &Privileged) -> Action {
            Action::Done
        }
    }

    struct Crasher;
    impl Policy for Crasher {
        fn name(&self) -> &str {
            "crasher"
        }
        fn act(&mut self, obs: &Observation, _: &Privileged) -> Action {
            if obs.step_index == 3 {
                panic!("boom");
            }
            Action::Forward
        }
        fn stats(&self) -> AgentStats {
            AgentStats::default()
        }
    }

    #[test]
    fn blind_reaches_goal_in_empty_room() {
        let task = room_task(Pose::new(1.0, 1.0, 2.0), (4.5, 4.0), 500);
        let cfg = WorldConfig::default();
        let mut agent = AgentConfig::blind().build(&EpisodeRunner::new(&task, &cfg, "x").context());
        let r = run_episode(agent.as_mut(), &task, &cfg);
        assert!(r.success);
        assert_eq!(r.reason, EndReason::Reached);
        assert!(r.time_fraction < 1.0);
        assert!((trajectory_length(&r.trajectory) - r.path_length).abs() < 1e-9);
    }

    #[test]
    fn turning_in_place_times_out() {
        let task = room_task(Pose::new(1.0, 1.0, 0.0), (4.5, 4.0), 50);
        let r = run_episode(&mut Spinner, &task, &WorldConfig::default());
        assert_eq!(r.reason, EndReason::TimedOut);
        assert!(!r.success);
        assert_eq!(r.time_fraction, 1.0);
        assert_eq!(r.steps, 50);
        assert_eq!(r.path_length, 0.0);
    }

    #[test]
    fn immediate_done_far_away_fails() {
        let task = room_task(Pose::new(1.0, 1.0, 0.0), (4.0, 1.0), 500);
        let r = run_episode(&mut Quitter, &task, &WorldConfig::default());
        assert_eq!(r.reason, EndReason::DoneOutsideRadius);
        assert!(!r.success);
        assert_eq!(r.time_fraction, 1.0);
    }

    #[test]
    fn immediate_done_at_goal_has_full_pace() {
        let task = room_task(Pose::new(1.0, 1.0, 0.0), (1.3, 1.0), 500);
        let r = run_episode(&mut Quitter, &task, &WorldConfig::default());
        assert!(r.success);
        assert_eq!(r.pace_term(), 1.0);
    }

    #[test]
    fn panicking_agent_is_a_fault() {
        let task = room_task(Pose::new(1.0, 1.0, 0.0), (4.0, 1.0), 500);
        let r = run_episode(&mut Crasher, &task, &WorldConfig::default());
        assert_eq!(r.reason, EndReason::AgentFault);
        assert!(!r.success);
        assert_eq!(r.steps, 3);
    }

    #[test]
    fn lenient_mode_counts_budget_end_inside_radius() {
        let task = room_task(Pose::new(1.0, 1.0, 0.0), (1.2, 1.0), 5);
        let strict = run_episode(&mut Spinner, &task, &WorldConfig::default());
        assert!(!strict.success);
        let lenient = WorldConfig { done_required: false, ..WorldConfig::default() };
        let r = run_episode(&mut Spinner, &task, &lenient);
        assert!(r.success);
        assert_eq!(r.time_fraction, 1.0);
    }

    #[test]
    fn replay_matches_live_run() {
        let task = room_task(Pose::new(1.0, 1.0, 2.0), (4.5, 4.0), 500);
        let cfg = WorldConfig::default();
        let mut agent = AgentConfig::blind().build(&EpisodeRunner::new(&task, &cfg, "x").context());
        let live = run_episode(agent.as_mut(), &task, &cfg);
        let actions: Vec<Action> = live.trajectory.iter().filter_map(|t| t.action).filter(|a| *a != Action::Done).collect();
        assert_eq!(replay_actions(&task, &cfg, "blind", &actions), live);
    }
}
