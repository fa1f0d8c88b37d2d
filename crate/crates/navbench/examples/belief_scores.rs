//! One decision of the belief-greedy agent, taken apart. For each motion
//! the agent rolls out futures on its obstacle map, bins where it ends up
//! into egocentric belief maps, and scores each by the expected distance
//! to the goal.

use navbench::agents::{belief_scores, expected_measurement, measurement_map, predict_beliefs, BeliefGrid, PredictorConfig};
use navbench::mapping::{MapperConfig, ObstacleMap};
use navbench::world::{goal_polar, raycast, Action, AgentBody, KinematicsConfig, Point, Pose, SensorConfig, WorldMap};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // A wall between the agent and a goal straight ahead.
    let world = WorldMap::from_rows(
        0.1,
        &[
            "########################################",
            "#......................................#",
            "#......................................#",
            "#......................................#",
            "#......................................#",
            "#.................#....................#",
            "#.................#....................#",
            "#.................#....................#",
            "#.................#....................#",
            "#.................#....................#",
            "#.................#....................#",
            "#.................#....................#",
            "#......................................#",
            "#......................................#",
            "#......................................#",
            "########################################",
        ],
    )
    .unwrap();
    let pose = Pose::new(1.2, 0.85, 0.0);
    let goal = goal_polar(&pose, Point::new(2.8, 0.85));
    let (kin, body) = (KinematicsConfig::default(), AgentBody::default());
    let mut map = ObstacleMap::covering(&MapperConfig::default(), &world);
    for _ in 0..3 {
        map.integrate_scan(&pose, &raycast(&world, &pose, &SensorConfig::default()));
    }

    let grid = BeliefGrid::default();
    let cfg = PredictorConfig::default();
    let mmap = measurement_map(goal, grid);
    let (cr, cc) = grid.center();
    println!("goal {:.2} m at bearing {:.1} deg; measurement at the agent cell {:.2}", goal.distance, goal.bearing.to_degrees(), mmap.value(cr, cc));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for a in Action::MOTION {
        let beliefs = predict_beliefs(&map, &pose, pose.polar_to_world(goal.distance, goal.bearing), a, &cfg, grid, &kin, &body, &mut rng);
        let per_h: Vec<String> = beliefs
            .iter()
            .zip(&cfg.horizons)
            .map(|(b, h)| format!("h{h}:{:.2}", expected_measurement(b, &mmap).unwrap()))
            .collect();
        println!("{a:>7}: {}", per_h.join(" "));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scores = belief_scores(&map, &pose, goal, &cfg, grid, &kin, &body, &mut rng);
    let best = (0..3).min_by(|&i, &j| scores[i].total_cmp(&scores[j])).unwrap();
    println!("weighted scores {scores:.2?}; the agent picks {}", Action::MOTION[best]);
}
