//! Scenario suites, episode execution, metrics and reports.

mod episode;
mod generate;
mod metrics;
mod report;
mod scenario;
mod suite;

pub use episode::{replay_actions, run_episode, trajectory_length, EndReason, EpisodeResult, EpisodeRunner, TrajectoryStep, WorldConfig};
pub use generate::{generate_scenarios, GeneratedScenarios, ScenarioGenConfig};
pub use metrics::{
    cumulative, cumulative_curve, default_thresholds, mean_metric, pace, paired_bootstrap, spl, spl_term, sr, CurvePoint,
    Metric, Outcome, Sample,
};
pub use report::{
    by_agent, curves_csv, curves_svg, load_rows, read_rows, side_by_side, summaries, write_curves, write_report, write_rows,
    UNDEFINED,
};
pub use scenario::{load_suite, read_scenarios, save_scenarios, write_scenarios, LoadedScenario, Scenario};
pub use suite::{run_agent, run_suite, ResultRow, Summary, SuiteReport};

use crate::world::MapParseError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("no episodes")]
    Empty,
    #[error("shortest path length must be positive")]
    NonPositiveShortest,
    #[error("not found: {0}")]
    NotFound(String),
    #[error("scenario {id}: {reason}")]
    InvalidScenario { id: String, reason: String },
    #[error("map {0}: {1}")]
    Map(String, MapParseError),
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
