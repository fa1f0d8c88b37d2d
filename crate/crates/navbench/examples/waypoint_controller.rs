//! Path following with a look-ahead waypoint. The path comes from D* Lite
//! on the true map; the controller turns until the waypoint is inside its
//! forward cone, then drives.

use navbench::locomotion::{Controller, ControllerConfig};
use navbench::planning::{BoolGrid, DStarLite, PlanOptions};
use navbench::world::{generate_map, goal_polar, spawn_cells, step, Action, AgentBody, Cell, GeneratorConfig, GridMap, KinematicsConfig, MetricGrid, Pose};

fn main() {
    let world = generate_map(8, &GeneratorConfig::furnished()).unwrap();
    let cells = spawn_cells(&world);
    let (s, g) = (cells[0], cells[cells.len() - 1]);
    let (sp, gp) = (world.cell_center(s), world.cell_center(g));
    let mut pose = Pose::new(sp.x, sp.y, 0.0);

    // Plan on obstacles grown by one cell so cell-centre paths keep the
    // 0.1 m body off corners.
    let mut inflated = BoolGrid::new(world.width(), world.height());
    for c in world.free_cells().collect::<Vec<_>>() {
        let near = (-1..=1).any(|dy| (-1..=1).any(|dx| world.is_blocked(c.offset(dx, dy))));
        inflated.set(c, near);
    }
    for y in 0..world.height() as i32 {
        for x in 0..world.width() as i32 {
            if world.is_blocked(Cell::new(x, y)) {
                inflated.set(Cell::new(x, y), true);
            }
        }
    }
    let mut planner = DStarLite::new(&inflated, s, g, PlanOptions::default()).unwrap();
    let path = planner.compute().expect("generated maps are connected");
    let points: Vec<_> = path.cells.iter().map(|c| world.cell_center(*c)).collect();
    println!("planned {} cells, {:.2} m", path.cells.len(), path.cost * world.cell_size());

    // Deterministic controller: no random actions.
    let cfg = ControllerConfig { p_random: 0.0, ..ControllerConfig::default() };
    let mut ctl = Controller::new(cfg, 0);
    let (kin, body) = (KinematicsConfig::default(), AgentBody::default());
    let mut counts = [0usize; 4];
    for t in 0..500 {
        ctl.set_path(&points, &pose);
        let a = ctl.act(&pose, goal_polar(&pose, gp).distance, &points);
        counts[Action::ALL.iter().position(|x| *x == a).unwrap()] += 1;
        if t % 20 == 0 {
            let wp = ctl.waypoint().unwrap_or(gp);
            println!("t={t:3} at ({:.2}, {:.2}) waypoint ({:.2}, {:.2}) -> {a}", pose.x, pose.y, wp.x, wp.y);
        }
        if a == Action::Done {
            println!("done after {t} actions, {:.2} m from the goal", goal_polar(&pose, gp).distance);
            break;
        }
        pose = step(&world, &pose, a, &kin, &body);
    }
    println!("forward {} left {} right {} done {}", counts[0], counts[1], counts[2], counts[3]);
}
