//! Generate a furnished floor plan, drop an agent in it, and look through
//! its depth fan while it drives forward into the furniture.

use navbench::world::{
    generate_map, map_to_text, raycast, step, spawn_cells, Action, AgentBody, GeneratorConfig, KinematicsConfig, MetricGrid, Pose,
    SensorConfig,
};

fn main() {
    let map = generate_map(3, &GeneratorConfig::furnished()).expect("default parameters are satisfiable");
    let start = map.cell_center(spawn_cells(&map)[0]);
    let mut pose = Pose::new(start.x, start.y, 0.0);
    let (kin, body, sensor) = (KinematicsConfig::default(), AgentBody::default(), SensorConfig::default());

    // Overlay the agent on the map text.
    let text = map_to_text(&map);
    let agent = map.cell_of(pose.position());
    let rows: Vec<&str> = text.lines().skip_while(|l| *l != "grid").skip(1).collect();
    for (i, row) in rows.iter().enumerate() {
        let y = rows.len() - 1 - i;
        let line: String = row
            .chars()
            .enumerate()
            .map(|(x, ch)| if (x as i32, y as i32) == (agent.x, agent.y) { '@' } else { ch })
            .collect();
        println!("{line}");
    }

    for t in 0..25 {
        let scan = raycast(&map, &pose, &sensor);
        let nearest = scan.valid_rays().map(|(_, r)| r).fold(f64::INFINITY, f64::min);
        let centre = scan.ranges[scan.n_rays() / 2];
        if t % 5 == 0 {
            println!(
                "t={t:2} pose=({:.2}, {:.2}) {} of {} rays hit, nearest {nearest:.2} m, straight ahead {centre:.2} m",
                pose.x,
                pose.y,
                scan.valid_count(),
                scan.n_rays()
            );
        }
        let next = step(&map, &pose, Action::Forward, &kin, &body);
        if next.position().distance(pose.position()) < 1e-9 {
            println!("t={t:2} blocked at ({:.2}, {:.2}); contact keeps the body clear of obstacles", pose.x, pose.y);
            break;
        }
        pose = next;
    }
}
