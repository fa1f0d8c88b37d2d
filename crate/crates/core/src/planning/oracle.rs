use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::graph::{node_blocked, step_cost, NoPath, PlanOptions, NEIGHBORS};
use super::queue::{Cost, Entry, Key};
use crate::world::{Cell, GridMap};

/// Uniform-cost search from `start` to `goal`; the reference every
/// incremental result is checked against. Cost in cell units.
pub fn oracle_shortest<G: GridMap + ?Sized>(grid: &G, start: Cell, goal: Cell, opts: &PlanOptions) -> Result<f64, NoPath> {
    let blocked = node_blocked(grid);
    if blocked(start) || blocked(goal) {
        return Err(NoPath);
    }
    let mut dist = vec![f64::INFINITY; grid.width() * grid.height()];
    let mut heap = BinaryHeap::new();
    dist[grid.index(start)] = 0.0;
    heap.push(Reverse((OrdF64(0.0), grid.index(start))));
    while let Some(Reverse((OrdF64(d), i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let u = grid.cell_at(i);
        if u == goal {
            return Ok(d);
        }
        for (dx, dy) in NEIGHBORS {
            let c = step_cost(&blocked, u, dx, dy, opts);
            if c.is_infinite() {
                continue;
            }
            let j = grid.index(u.offset(dx, dy));
            let nd = d + c;
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse((OrdF64(nd), j)));
            }
        }
    }
    Err(NoPath)
}

/// Result of one from-scratch search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchStats {
    pub cost: Option<f64>,
    pub expansions: u64,
}

/// A* searching backward from `goal` to `start` with the octile heuristic,
/// the same direction and tie-breaking as the first D* Lite search. Used as
/// the replan-from-scratch baseline. The start is not counted as expanded.
pub fn astar<G: GridMap + ?Sized>(grid: &G, start: Cell, goal: Cell, opts: &PlanOptions) -> SearchStats {
    let blocked = node_blocked(grid);
    if blocked(start) || blocked(goal) {
        return SearchStats {
            cost: None,
            expansions: 0,
        };
    }
    let n = grid.width() * grid.height();
    let mut g = vec![Cost::INF; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[grid.index(goal)] = Cost::ZERO;
    heap.push(Reverse(Entry {
        key: Key(Cost::octile(start, goal), Cost::ZERO),
        index: grid.index(goal),
    }));
    let mut expansions = 0;
    while let Some(Reverse(e)) = heap.pop() {
        let i = e.index;
        if closed[i] || e.key.1 > g[i] {
            continue;
        }
        let u = grid.cell_at(i);
        if u == start {
            return SearchStats {
                cost: Some(g[i].to_f64()),
                expansions,
            };
        }
        closed[i] = true;
        expansions += 1;
        for (dx, dy) in NEIGHBORS {
            if step_cost(&blocked, u, dx, dy, opts).is_infinite() {
                continue;
            }
            let c = if dx != 0 && dy != 0 { Cost::DIAGONAL } else { Cost::AXIS };
            let v = u.offset(dx, dy);
            let j = grid.index(v);
            let ng = g[i] + c;
            if ng < g[j] {
                g[j] = ng;
                heap.push(Reverse(Entry {
                    key: Key(ng + Cost::octile(start, v), ng),
                    index: j,
                }));
            }
        }
    }
    SearchStats {
        cost: None,
        expansions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
