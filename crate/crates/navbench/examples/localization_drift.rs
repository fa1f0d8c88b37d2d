//! Dead reckoning against scan matching. Both localizers see the same
//! noisy odometry; each builds its own map from its own pose estimates.

use navbench::localization::{BodyDelta, Localizer, LocalizerConfig, PoseStatus};
use navbench::mapping::{MapperConfig, ObstacleMap};
use navbench::world::{generate_map, raycast, spawn_cells, step, Action, AgentBody, GeneratorConfig, KinematicsConfig, MetricGrid, Pose, SensorConfig};

struct Track {
    name: &'static str,
    localizer: Localizer,
    map: ObstacleMap,
    failures: usize,
}

fn main() {
    let world = generate_map(5, &GeneratorConfig::furnished()).unwrap();
    let cells = spawn_cells(&world);
    let start = world.cell_center(cells[cells.len() / 3]);
    let mut truth = Pose::new(start.x, start.y, 0.3);
    let (kin, body, sensor) = (KinematicsConfig::default(), AgentBody::default(), SensorConfig::default());
    let noisy = LocalizerConfig { sigma_lin: 0.02, sigma_ang: 1f64.to_radians(), ..LocalizerConfig::odometry(0.0, 0.0) };
    let matcher = LocalizerConfig { sigma_lin: 0.02, sigma_ang: 1f64.to_radians(), ..LocalizerConfig::scan_matcher() };

    let mut tracks: Vec<Track> = [("odometry", noisy), ("scan matcher", matcher)]
        .into_iter()
        .map(|(name, cfg)| Track {
            name,
            localizer: Localizer::new(cfg, truth, 17),
            map: ObstacleMap::covering(&MapperConfig::default(), &world),
            failures: 0,
        })
        .collect();

    // Wander: forward until blocked, then turn away.
    let mut motion = BodyDelta::default();
    let mut action = Action::Forward;
    for t in 0..300 {
        let scan = raycast(&world, &truth, &sensor);
        for tr in &mut tracks {
            let est = tr.localizer.observe(motion, &scan, &tr.map, &truth);
            if est.status == PoseStatus::Failure {
                tr.failures += 1;
            }
            tr.map.integrate_scan(&est.pose, &scan);
        }
        if t % 50 == 0 {
            let errs: Vec<String> = tracks
                .iter()
                .map(|tr| format!("{} {:.3} m", tr.name, tr.localizer.current().position().distance(truth.position())))
                .collect();
            println!("t={t:3} position error: {}", errs.join(", "));
        }
        let centre = scan.ranges[scan.n_rays() / 2];
        action = match action {
            Action::TurnLeft if centre < 1.0 => Action::TurnLeft,
            _ if centre < 0.4 => Action::TurnLeft,
            _ => Action::Forward,
        };
        let next = step(&world, &truth, action, &kin, &body);
        motion = BodyDelta::between(&truth, &next);
        truth = next;
    }
    for tr in &tracks {
        println!(
            "{}: final error {:.3} m, {} match failures, {} mapped obstacle cells",
            tr.name,
            tr.localizer.current().position().distance(truth.position()),
            tr.failures,
            tr.map.occupied_count()
        );
    }
}
