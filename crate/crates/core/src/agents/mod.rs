//! Observation-to-action policies.

mod belief;
mod blind;
mod classic;

pub use belief::{
    belief_scores, expected_measurement, measurement_map, predict_beliefs, BeliefAgent, BeliefGrid, BeliefMap,
    GeometryMismatch, MeasurementMap, PredictorConfig, RolloutPolicy,
};
pub use blind::{blind_policy, BlindAgent};
pub use classic::{ClassicAgent, ClassicConfig};

use serde::{Deserialize, Serialize};

use crate::localization::{BodyDelta, LocalizerConfig};
use crate::locomotion::ControllerConfig;
use crate::mapping::MapperConfig;
use crate::planning::PlanOptions;
use crate::world::{Action, AgentBody, DepthScan, GoalVector, KinematicsConfig, Point, Pose};

/// What an agent sees at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub depth: Option<DepthScan>,
    pub goal: GoalVector,
    /// `(sin, cos)` of the goal bearing.
    pub goal_direction: (f64, f64),
    /// Wheel-odometry reading: the motion executed by the previous action.
    pub odometry: BodyDelta,
    pub prev_action: Option<Action>,
    pub step_index: usize,
    pub budget_remaining: usize,
}

impl Observation {
    pub fn new(
        depth: Option<DepthScan>,
        goal: GoalVector,
        odometry: BodyDelta,
        prev_action: Option<Action>,
        step_index: usize,
        budget_remaining: usize,
    ) -> Self {
        Self {
            depth,
            goal,
            goal_direction: goal.bearing.sin_cos(),
            odometry,
            prev_action,
            step_index,
            budget_remaining,
        }
    }
}

/// Ground truth that only the `Perfect` localizer may read.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Privileged {
    pub pose: Pose,
}

/// Per-episode facts handed to an agent when it is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeContext {
    /// Start pose; the estimate frame coincides with the world frame here.
    pub start: Pose,
    /// Lower-left corner and size (meters) of the area the map must cover.
    pub extent_origin: Point,
    pub extent_size: (f64, f64),
    pub success_radius: f64,
    pub budget: usize,
    pub kinematics: KinematicsConfig,
    pub body: AgentBody,
    pub seed: u64,
}

/// Counters an agent may expose for logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AgentStats {
    pub localization_failures: u64,
    pub fallback_ticks: u64,
    pub planner_expansions: u64,
}

pub trait Policy: Send {
    fn name(&self) -> &str;
    fn act(&mut self, obs: &Observation, privileged: &Privileged) -> Action;
    fn stats(&self) -> AgentStats {
        AgentStats::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Blind,
    Classic,
    Belief,
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blind" => Ok(Self::Blind),
            "classic" => Ok(Self::Classic),
            "belief" | "bdfp" => Ok(Self::Belief),
            other => Err(format!("unknown agent {other:?}")),
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Blind => "blind",
            Self::Classic => "classic",
            Self::Belief => "belief",
        })
    }
}

/// Everything needed to instantiate an agent for an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub localizer: LocalizerConfig,
    pub mapper: MapperConfig,
    pub planner: PlanOptions,
    pub classic: ClassicConfig,
    pub controller: ControllerConfig,
    /// Overrides the controller's Done threshold; `None` uses the
    /// scenario's success radius.
    pub done_threshold: Option<f64>,
    pub predictor: PredictorConfig,
    pub belief_grid: BeliefGrid,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            kind: AgentKind::Blind,
            localizer: LocalizerConfig::default(),
            mapper: MapperConfig::default(),
            planner: PlanOptions::default(),
            classic: ClassicConfig::default(),
            controller: ControllerConfig::default(),
            done_threshold: None,
            predictor: PredictorConfig::default(),
            belief_grid: BeliefGrid::default(),
        }
    }
}

impl AgentConfig {
    pub fn blind() -> Self {
        Self::default()
    }

    pub fn classic(localizer: LocalizerConfig) -> Self {
        Self {
            kind: AgentKind::Classic,
            localizer,
            ..Self::default()
        }
    }

    pub fn belief() -> Self {
        Self {
            kind: AgentKind::Belief,
            localizer: LocalizerConfig::odometry(0.0, 0.0),
            ..Self::default()
        }
    }

    /// Short label used in result rows, e.g. `classic-scanmatch`.
    pub fn label(&self) -> String {
        match self.kind {
            AgentKind::Blind => "blind".into(),
            k => format!("{k}-{}", self.localizer.kind),
        }
    }

    pub fn controller_for(&self, ctx: &EpisodeContext) -> ControllerConfig {
        ControllerConfig {
            done_threshold: self.done_threshold.unwrap_or(ctx.success_radius),
            ..self.controller
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.localizer.validate()?;
        self.controller.validate()?;
        self.predictor.validate()?;
        self.belief_grid.validate()?;
        Ok(())
    }

    pub fn build(&self, ctx: &EpisodeContext) -> Box<dyn Policy> {
        match self.kind {
            AgentKind::Blind => Box::new(BlindAgent::new(self.controller_for(ctx))),
            AgentKind::Classic => Box::new(ClassicAgent::new(self, ctx)),
            AgentKind::Belief => Box::new(BeliefAgent::new(self, ctx)),
        }
    }
}
