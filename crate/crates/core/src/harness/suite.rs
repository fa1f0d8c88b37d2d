use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EndReason, EpisodeResult, EpisodeRunner, WorldConfig};
use super::metrics::{cumulative_curve, default_thresholds, pace, spl, sr, CurvePoint, Outcome};
use super::scenario::LoadedScenario;
use super::HarnessError;
use crate::agents::{AgentConfig, AgentStats};

/// One episode of an agent, with the agent's internal counters.
pub fn run_agent(cfg: &AgentConfig, task: &LoadedScenario, world: &WorldConfig, run_seed: u64) -> (EpisodeResult, AgentStats) {
    let mut ctx = EpisodeRunner::new(task, world, cfg.label()).context();
    ctx.seed ^= run_seed;
    let mut agent = cfg.build(&ctx);
    let result = run_episode(agent.as_mut(), task, world);
    (result, agent.stats())
}

/// Flat per-episode row as written to `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub agent: String,
    pub success: u8,
    pub shortest: f64,
    pub path_length: f64,
    pub time_fraction: f64,
    pub steps: usize,
    pub budget: usize,
    pub reason: EndReason,
}

impl From<&EpisodeResult> for ResultRow {
    fn from(r: &EpisodeResult) -> Self {
        Self {
            scenario_id: r.scenario_id.clone(),
            agent: r.agent.clone(),
            success: u8::from(r.success),
            shortest: r.shortest,
            path_length: r.path_length,
            time_fraction: r.time_fraction,
            steps: r.steps,
            budget: r.budget,
            reason: r.reason,
        }
    }
}

impl Outcome for ResultRow {
    fn success(&self) -> bool {
        self.success == 1
    }
    fn shortest(&self) -> f64 {
        self.shortest
    }
    fn path_length(&self) -> f64 {
        self.path_length
    }
    fn time_fraction(&self) -> f64 {
        self.time_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub sr: f64,
    pub spl: f64,
    pub pace: f64,
}

impl Summary {
    pub fn of<O: Outcome>(rows: &[O]) -> Result<Self, HarnessError> {
        Ok(Self {
            episodes: rows.len(),
            sr: sr(rows)?,
            spl: spl(rows)?,
            pace: pace(rows)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub agent: String,
    pub summary: Summary,
    /// Rows in scenario-file order.
    pub results: Vec<EpisodeResult>,
    pub stats: Vec<AgentStats>,
    pub curve: Vec<CurvePoint>,
}

impl SuiteReport {
    pub fn from_results(agent: String, results: Vec<EpisodeResult>, stats: Vec<AgentStats>) -> Result<Self, HarnessError> {
        let summary = Summary::of(&results)?;
        let curve = cumulative_curve(&results, &default_thresholds(&results, 1.0));
        Ok(Self {
            agent,
            summary,
            results,
            stats,
            curve,
        })
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        self.results.iter().map(ResultRow::from).collect()
    }

    pub fn spl_terms(&self) -> Vec<f64> {
        self.results.iter().map(EpisodeResult::spl_term).collect()
    }

    pub fn total_stats(&self) -> AgentStats {
        self.stats.iter().fold(AgentStats::default(), |acc, s| AgentStats {
            localization_failures: acc.localization_failures + s.localization_failures,
            fallback_ticks: acc.fallback_ticks + s.fallback_ticks,
            planner_expansions: acc.planner_expansions + s.planner_expansions,
        })
    }
}

/// Run `agent` on every task using `parallelism` worker threads. Output
/// does not depend on the thread count: each episode is seeded from its
/// scenario and rows come back in input order.
pub fn run_suite(
    agent: &AgentConfig,
    tasks: &[LoadedScenario],
    world: &WorldConfig,
    parallelism: usize,
    run_seed: u64,
) -> Result<SuiteReport, HarnessError> {
    if tasks.is_empty() {
        return Err(HarnessError::Empty);
    }
    agent.validate().map_err(HarnessError::Config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let out: Vec<(EpisodeResult, AgentStats)> =
        pool.install(|| tasks.par_iter().map(|t| run_agent(agent, t, world, run_seed)).collect());
    let (results, stats) = out.into_iter().unzip();
    SuiteReport::from_results(agent.label(), results, stats)
}
