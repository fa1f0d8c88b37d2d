//! Desk-scale PointGoal navigation benchmark: a grid world with a depth
//! fan sensor, classic and learned-style agents, and an evaluation harness.

pub mod agents;
pub mod config;
pub mod harness;
pub mod localization;
pub mod locomotion;
pub mod mapping;
pub mod planning;
pub mod world;
