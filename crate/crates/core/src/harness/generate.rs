use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::world::{spawn_cells, MetricGrid, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioGenConfig {
    /// Minimum oracle shortest path, meters.
    pub min_shortest: f64,
    pub budget: usize,
    pub radius: f64,
    /// Start-goal draws per map before giving up on it.
    pub max_attempts: usize,
}

impl Default for ScenarioGenConfig {
    fn default() -> Self {
        Self {
            min_shortest: 1.0,
            budget: 500,
            radius: 0.5,
            max_attempts: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneratedScenarios {
    pub scenarios: Vec<Scenario>,
    /// Maps that yielded fewer than the requested number of pairs.
    pub skipped: Vec<String>,
}

/// Sample `per_map` start-goal pairs on each named map. Starts and goals
/// are centers of clear cells; pairs closer than `min_shortest` along the
/// oracle path are rejected. Deterministic for a given seed and map list.
pub fn generate_scenarios(maps: &[(String, &WorldMap)], per_map: usize, seed: u64, cfg: &ScenarioGenConfig) -> GeneratedScenarios {
    let mut out = GeneratedScenarios::default();
    for (k, (name, map)) in maps.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let cells = spawn_cells(map);
        let stem = std::path::Path::new(name)
            .file_stem()
            .map_or_else(|| name.clone(), |s| s.to_string_lossy().into_owned());
        let mut found = Vec::new();
        let mut attempts = 0;
        while found.len() < per_map && attempts < cfg.max_attempts && cells.len() >= 2 {
            attempts += 1;
            let s = cells[rng.random_range(0..cells.len())];
            let g = cells[rng.random_range(0..cells.len())];
            let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let ep_seed: u64 = rng.random();
            let (sp, gp) = (map.cell_center(s), map.cell_center(g));
            match map.shortest_path_length(sp, gp) {
                Ok(l) if l >= cfg.min_shortest => {}
                _ => continue,
            }
            found.push(Scenario {
                id: format!("{stem}-{:03}", found.len()),
                map: name.clone(),
                start_x: sp.x,
                start_y: sp.y,
                start_theta: heading,
                goal_x: gp.x,
                goal_y: gp.y,
                budget: cfg.budget,
                radius: cfg.radius,
                seed: ep_seed,
            });
        }
        if found.len() < per_map {
            log::warn!("map {name}: only {} of {per_map} start-goal pairs after {attempts} attempts", found.len());
            out.skipped.push(name.clone());
            continue;
        }
        out.scenarios.extend(found);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::{write_scenarios, LoadedScenario};
    use crate::world::{generate_map, AgentBody, GeneratorConfig};
    use std::sync::Arc;

    #[test]
    fn pairs_are_reachable_far_enough_and_deterministic() {
        let maps: Vec<(String, WorldMap)> = (0..4)
            .map(|i| (format!("maps/m{i}.txt"), generate_map(i, &GeneratorConfig::furnished()).unwrap()))
            .collect();
        let refs: Vec<(String, &WorldMap)> = maps.iter().map(|(n, m)| (n.clone(), m)).collect();
        let a = generate_scenarios(&refs, 10, 42, &ScenarioGenConfig::default());
        assert_eq!(a.scenarios.len(), 40);
        assert!(a.skipped.is_empty());
        for s in &a.scenarios {
            let m = &maps.iter().find(|(n, _)| *n == s.map).unwrap().1;
            let t = LoadedScenario::new(s.clone(), Arc::new(m.clone()), &AgentBody::default()).unwrap();
            assert!(t.shortest >= 1.0);
        }
        let b = generate_scenarios(&refs, 10, 42, &ScenarioGenConfig::default());
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        write_scenarios(&a.scenarios, &mut ta).unwrap();
        write_scenarios(&b.scenarios, &mut tb).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a.scenarios[0].id, "m0-000");
    }

    #[test]
    fn tiny_map_is_skipped() {
        let tiny = WorldMap::empty_room(0.1, 8, 8).unwrap();
        let r = generate_scenarios(&[("tiny".into(), &tiny)], 3, 1, &ScenarioGenConfig::default());
        assert!(r.scenarios.is_empty());
        assert_eq!(r.skipped, vec!["tiny".to_string()]);
    }
}
