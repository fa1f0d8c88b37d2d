//! Incremental replanning. The agent knows nothing about the maze and
//! discovers walls within two cells as it walks; D* Lite repairs its
//! search after each discovery while A* starts over every time.

use navbench::planning::{astar, BoolGrid, DStarLite, PlanOptions};
use navbench::world::{Cell, GridMap};

const MAZE: [&str; 12] = [
    "..............................",
    "..........#...................",
    "..........#.........#.........",
    "..........#.........#.........",
    "..........#.........#.........",
    "..........#.........#.........",
    "..........#.........#.........",
    "..........#.........#.........",
    "..........#.........#.........",
    "....................#.........",
    "....................#.........",
    "....................#.........",
];

fn main() {
    let truth = BoolGrid::from_rows(&MAZE);
    let (start, goal) = (Cell::new(2, 6), Cell::new(27, 6));
    let opts = PlanOptions::default();
    let mut known = BoolGrid::new(truth.width(), truth.height());
    let mut planner = DStarLite::new(&known, start, goal, opts).unwrap();

    let (mut here, mut walked, mut fresh) = (start, 0.0, 0u64);
    while here != goal {
        let mut changed = Vec::new();
        for dy in -2..=2 {
            for dx in -2..=2 {
                let c = here.offset(dx, dy);
                if truth.in_bounds(c) && truth.is_blocked(c) && !known.is_blocked(c) {
                    known.set(c, true);
                    changed.push(c);
                }
            }
        }
        planner.update_cells(&known, &changed);
        planner.set_start(here);
        let path = planner.compute().expect("the maze is connected");
        fresh += astar(&known, here, goal, &opts).expansions;
        if !changed.is_empty() {
            println!(
                "at ({:2},{:2}) saw {:2} new wall cells; believed cost now {:.2}, D* Lite expanded {}",
                here.x,
                here.y,
                changed.len(),
                path.cost,
                planner.last_expansions()
            );
        }
        let next = path.cells[1];
        walked += if next.x != here.x && next.y != here.y { std::f64::consts::SQRT_2 } else { 1.0 };
        here = next;
    }
    println!("walked {walked:.2} cells");
    println!("total expansions: D* Lite {}, A* from scratch each step {fresh}", planner.expansions());
}
