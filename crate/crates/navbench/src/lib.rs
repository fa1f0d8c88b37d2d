//! Desk-scale PointGoal navigation benchmark.
//!
//! The simulation, agents and harness live in `navbench-core` and are
//! re-exported here; the human teleoperation server is under [`teleop`].
//! See `examples/` for one runnable program per capability.

pub use navbench_core::*;
pub use navbench_teleop as teleop;

pub mod cli;
