//! Shortest paths on the 8-connected cell graph: incremental D* Lite for
//! the agent, and from-scratch searches used as references.
//!
//! Axis edges cost 1 and diagonal edges √2 (cell units). Blocked cells have
//! no usable edges; by default a diagonal move also needs both axis cells
//! it passes between to be free.

mod dstar;
mod graph;
mod oracle;
mod queue;

pub use dstar::{DStarLite, PlanError};
pub use graph::{heuristic, nearest_traversable, BoolGrid, NoPath, PlanOptions, PlanPath, NEIGHBORS};
pub use oracle::{astar, oracle_shortest, SearchStats};

use serde::{Deserialize, Serialize};

/// One row of the optional planner trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTraceRow {
    pub step: usize,
    pub expansions: u64,
    /// Path cost in cell units; empty when no path exists.
    pub cost: Option<f64>,
}
