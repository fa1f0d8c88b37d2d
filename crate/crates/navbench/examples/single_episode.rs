//! The three agents on the same start-goal pair, with their paths drawn
//! over the map.

use std::sync::Arc;

use navbench::agents::AgentConfig;
use navbench::harness::{generate_scenarios, run_agent, LoadedScenario, ScenarioGenConfig, WorldConfig};
use navbench::localization::LocalizerConfig;
use navbench::world::{generate_map, GeneratorConfig, GridMap, MetricGrid, Point};

fn main() {
    let world = Arc::new(generate_map(21, &GeneratorConfig::furnished()).unwrap());
    let gen = generate_scenarios(&[("flat.txt".into(), world.as_ref())], 1, 4, &ScenarioGenConfig { min_shortest: 3.0, ..Default::default() });
    let cfg = WorldConfig::default();
    let task = LoadedScenario::new(gen.scenarios[0].clone(), world.clone(), &cfg.body).unwrap();
    println!("{}: shortest path {:.2} m", task.scenario.id, task.shortest);

    let agents = [AgentConfig::blind(), AgentConfig::classic(LocalizerConfig::scan_matcher()), AgentConfig::belief()];
    let marks = ['b', 'c', 'g'];
    let mut canvas: Vec<Vec<char>> = (0..world.height())
        .map(|y| (0..world.width()).map(|x| if world.is_occupied(navbench::world::Cell::new(x as i32, y as i32)) { '#' } else { ' ' }).collect())
        .collect();
    for (agent, mark) in agents.iter().zip(marks) {
        let (r, stats) = run_agent(agent, &task, &cfg, 0);
        println!(
            "{:>16}: success {} in {:3} steps, path {:.2} m, SPL term {:.3}, {:?}, planner expansions {}",
            r.agent,
            r.success,
            r.steps,
            r.path_length,
            r.spl_term(),
            r.reason,
            stats.planner_expansions
        );
        for t in &r.trajectory {
            let c = world.cell_of(Point::new(t.x, t.y));
            canvas[c.y as usize][c.x as usize] = mark;
        }
    }
    for (p, ch) in [(task.scenario.start().position(), 'S'), (task.scenario.goal(), 'G')] {
        let c = world.cell_of(p);
        canvas[c.y as usize][c.x as usize] = ch;
    }
    println!("b = blind, c = classic with scan matching, g = belief-greedy (later agents draw over earlier)");
    for row in canvas.iter().rev() {
        println!("{}", row.iter().collect::<String>());
    }
}
