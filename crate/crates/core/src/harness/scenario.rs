use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::world::{disc_collides, load_map, AgentBody, Point, Pose, WorldMap};

/// One start-goal task. The scenario file stores these one per row in the
/// field order below; `map` is resolved relative to the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub map: String,
    pub start_x: f64,
    pub start_y: f64,
    pub start_theta: f64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub budget: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn start(&self) -> Pose {
        Pose::new(self.start_x, self.start_y, self.start_theta)
    }

    pub fn goal(&self) -> Point {
        Point::new(self.goal_x, self.goal_y)
    }
}

/// A scenario with its map loaded and its shortest path length known.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub world: Arc<WorldMap>,
    /// Oracle shortest path length, meters.
    pub shortest: f64,
}

impl LoadedScenario {
    /// Check the task against its map: start and goal clear of obstacles,
    /// a path between them, positive budget and length.
    pub fn new(scenario: Scenario, world: Arc<WorldMap>, body: &AgentBody) -> Result<Self, HarnessError> {
        let bad = |reason: String| HarnessError::InvalidScenario {
            id: scenario.id.clone(),
            reason,
        };
        if scenario.budget == 0 {
            return Err(bad("budget must be positive".into()));
        }
        if !(scenario.radius > 0.0) {
            return Err(bad("success radius must be positive".into()));
        }
        if !scenario.start().is_finite() || !(scenario.goal_x.is_finite() && scenario.goal_y.is_finite()) {
            return Err(bad("non-finite coordinates".into()));
        }
        if disc_collides(world.as_ref(), scenario.start().position(), body.radius) {
            return Err(bad("start overlaps an obstacle".into()));
        }
        if disc_collides(world.as_ref(), scenario.goal(), body.radius) {
            return Err(bad("goal overlaps an obstacle".into()));
        }
        let shortest = world
            .shortest_path_length(scenario.start().position(), scenario.goal())
            .map_err(|_| bad("no path from start to goal".into()))?;
        if !(shortest > 0.0) {
            return Err(bad("start and goal share a cell".into()));
        }
        Ok(Self {
            scenario,
            world,
            shortest,
        })
    }
}

pub fn read_scenarios<R: std::io::Read>(input: R) -> Result<Vec<Scenario>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_scenarios<W: std::io::Write>(scenarios: &[Scenario], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for s in scenarios {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_scenarios(scenarios: &[Scenario], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let f = std::fs::File::create(path)?;
    write_scenarios(scenarios, std::io::BufWriter::new(f))
}

/// Load a scenario file and every map it references. Fails on the first
/// unloadable map or invalid scenario, before anything runs.
pub fn load_suite(path: impl AsRef<Path>, body: &AgentBody) -> Result<Vec<LoadedScenario>, HarnessError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| HarnessError::NotFound(format!("{}: {e}", path.display())))?;
    let scenarios = read_scenarios(file)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut maps: HashMap<String, Arc<WorldMap>> = HashMap::new();
    let mut out = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let world = match maps.get(&s.map) {
            Some(m) => m.clone(),
            None => {
                let p: PathBuf = base.join(&s.map);
                let m = Arc::new(load_map(&p).map_err(|e| HarnessError::Map(p.display().to_string(), e))?);
                maps.insert(s.map.clone(), m.clone());
                m
            }
        };
        out.push(LoadedScenario::new(s, world, body)?);
    }
    if out.is_empty() {
        return Err(HarnessError::Empty);
    }
    Ok(out)
}
