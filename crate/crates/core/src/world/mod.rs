//! Ground-truth environment: occupancy grid, agent kinematics, collision,
//! depth sensing, procedural maps and the map file format.

mod generator;
mod grid;
mod io;
mod kinematics;
mod pose;
mod sensor;

pub use generator::{generate_map, spawn_cells, GeneratorConfig, GeneratorError};
pub use grid::{Cell, CellRect, GridMap, MetricGrid, WorldError, WorldMap};
pub use io::{load_map, map_from_text, map_to_text, save_map, MapParseError};
pub use kinematics::{contact_distance, disc_collides, step, AgentBody, CollisionMode, KinematicsConfig};
pub use pose::{goal_polar, normalize_angle, Action, GoalVector, Point, Pose, UnknownAction};
pub use sensor::{cast_ray, raycast, DepthScan, SensorConfig};
