//! Build an obstacle map from depth scans taken at true poses while the
//! agent spins in place and then walks a short loop.

use navbench::mapping::{MapperConfig, ObstacleMap};
use navbench::world::{generate_map, raycast, spawn_cells, step, Action, AgentBody, GeneratorConfig, KinematicsConfig, MetricGrid, Pose, SensorConfig};

fn main() {
    let world = generate_map(11, &GeneratorConfig::furnished()).unwrap();
    let cells = spawn_cells(&world);
    let start = world.cell_center(cells[cells.len() / 2]);
    let mut pose = Pose::new(start.x, start.y, 0.0);
    let cfg = MapperConfig::default();
    let mut map = ObstacleMap::covering(&cfg, &world);
    let (kin, body, sensor) = (KinematicsConfig::default(), AgentBody::default(), SensorConfig::default());

    let plan = std::iter::repeat_n(Action::TurnLeft, 36)
        .chain(std::iter::repeat_n(Action::Forward, 10))
        .chain(std::iter::repeat_n(Action::TurnRight, 9))
        .chain(std::iter::repeat_n(Action::Forward, 10));
    for (t, a) in plan.enumerate() {
        let changed = map.integrate_scan(&pose, &raycast(&world, &pose, &sensor));
        if !changed.is_empty() && t % 6 == 0 {
            println!("t={t:2} {} cells flipped to occupied", changed.len());
        }
        pose = step(&world, &pose, a, &kin, &body);
    }

    // Compare against ground truth: mapped cells should be real obstacles.
    let occupied: Vec<_> = map.occupied_cells().collect();
    let true_hits = occupied.iter().filter(|c| world.is_occupied(**c)).count();
    println!(
        "{} occupied cells (threshold: count > {}), {true_hits} on true obstacles, {} endpoints beyond the grid",
        occupied.len(),
        map.threshold(),
        map.dropped_endpoints()
    );
    println!("{}", map.to_text());
}
