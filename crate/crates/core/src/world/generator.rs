use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Cell, CellRect, WorldError, WorldMap};

/// Procedural floor-plan parameters. Sizes are in cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub min_rooms: usize,
    pub max_rooms: usize,
    /// Target occupied fraction of the interior, walls included.
    pub clutter_density: f64,
    pub door_width: usize,
    pub min_room_side: usize,
    pub max_block_side: usize,
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            width: 60,
            height: 60,
            cell_size: 0.1,
            min_rooms: 2,
            max_rooms: 4,
            clutter_density: 0.0,
            door_width: 7,
            min_room_side: 12,
            max_block_side: 6,
            max_attempts: 50,
        }
    }
}

impl GeneratorConfig {
    /// Single rectangular room, no furniture.
    pub fn empty_room(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            min_rooms: 1,
            max_rooms: 1,
            clutter_density: 0.0,
            ..Self::default()
        }
    }

    /// Several rooms joined by doors, with furniture blocks.
    pub fn furnished() -> Self {
        Self {
            clutter_density: 0.2,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no connected map satisfying the parameters after {0} attempts")]
    Unsatisfiable(usize),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Deterministic floor plan for `seed`. Free space is 8-connected, and the
/// cells whose full 3x3 neighborhood is free form one 4-connected region,
/// so a disc of one-cell radius can travel between any two such cells.
pub fn generate_map(seed: u64, cfg: &GeneratorConfig) -> Result<WorldMap, GeneratorError> {
    validate(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_attempts {
        if let Some(map) = attempt(&mut rng, cfg)? {
            return Ok(map);
        }
    }
    Err(GeneratorError::Unsatisfiable(cfg.max_attempts))
}

fn validate(cfg: &GeneratorConfig) -> Result<(), GeneratorError> {
    let bad = |m: &str| Err(GeneratorError::InvalidParams(m.to_string()));
    if cfg.width < 8 || cfg.height < 8 {
        return bad("map must be at least 8x8 cells");
    }
    if !(0.0..=1.0).contains(&cfg.clutter_density) {
        return bad("clutter density must be in [0, 1]");
    }
    if cfg.min_rooms == 0 || cfg.min_rooms > cfg.max_rooms {
        return bad("room range must satisfy 1 <= min_rooms <= max_rooms");
    }
    if cfg.door_width < 3 {
        return bad("doors must be at least 3 cells wide");
    }
    if cfg.max_block_side < 1 || cfg.max_attempts == 0 {
        return bad("max_block_side and max_attempts must be positive");
    }
    if cfg.min_room_side < cfg.door_width + 2 {
        return bad("rooms must be wider than their doors");
    }
    Ok(())
}

struct Canvas {
    width: usize,
    height: usize,
    occ: Vec<bool>,
}

impl Canvas {
    fn get(&self, x: i32, y: i32) -> bool {
        x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 || self.occ[y as usize * self.width + x as usize]
    }

    fn set(&mut self, x: i32, y: i32, v: bool) {
        self.occ[y as usize * self.width + x as usize] = v;
    }

    fn interior_fraction(&self) -> f64 {
        let mut n = 0;
        for y in 1..self.height as i32 - 1 {
            for x in 1..self.width as i32 - 1 {
                n += self.get(x, y) as usize;
            }
        }
        n as f64 / ((self.width - 2) * (self.height - 2)) as f64
    }

    fn clear(&self, x: i32, y: i32) -> bool {
        (-1..=1).all(|dy| (-1..=1).all(|dx| !self.get(x + dx, y + dy)))
    }

    /// Free space 8-connected and clear cells 4-connected (and non-empty).
    fn well_connected(&self) -> bool {
        let free: Vec<usize> = (0..self.occ.len()).filter(|&i| !self.occ[i]).collect();
        let clear: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&i| self.clear((i % self.width) as i32, (i / self.width) as i32))
            .collect();
        if clear.is_empty() {
            return false;
        }
        let n8: &[(i32, i32)] = &[(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
        let n4: &[(i32, i32)] = &[(1, 0), (0, 1), (-1, 0), (0, -1)];
        self.flood(free[0], n8, |x, y| !self.get(x, y)) == free.len()
            && self.flood(clear[0], n4, |x, y| self.clear(x, y)) == clear.len()
    }

    fn flood(&self, from: usize, nbrs: &[(i32, i32)], ok: impl Fn(i32, i32) -> bool) -> usize {
        let mut seen = vec![false; self.occ.len()];
        let mut q = VecDeque::from([from]);
        seen[from] = true;
        let mut count = 1;
        while let Some(i) = q.pop_front() {
            let (x, y) = ((i % self.width) as i32, (i / self.width) as i32);
            for &(dx, dy) in nbrs {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= self.width as i32 || ny >= self.height as i32 {
                    continue;
                }
                let j = ny as usize * self.width + nx as usize;
                if !seen[j] && ok(nx, ny) {
                    seen[j] = true;
                    count += 1;
                    q.push_back(j);
                }
            }
        }
        count
    }
}

fn attempt(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<Option<WorldMap>, GeneratorError> {
    let (w, h) = (cfg.width, cfg.height);
    let mut canvas = Canvas {
        width: w,
        height: h,
        occ: vec![false; w * h],
    };
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            if x == 0 || y == 0 || x == w as i32 - 1 || y == h as i32 - 1 {
                canvas.set(x, y, true);
            }
        }
    }

    // Rooms by recursive splitting of the largest splittable rectangle.
    let target_rooms = rng.random_range(cfg.min_rooms..=cfg.max_rooms);
    let mut rooms = vec![CellRect {
        x_min: 1,
        y_min: 1,
        x_max: w as i32 - 2,
        y_max: h as i32 - 2,
    }];
    let side = cfg.min_room_side as i32;
    while rooms.len() < target_rooms {
        let splittable = |r: &CellRect| {
            let rw = r.x_max - r.x_min + 1;
            let rh = r.y_max - r.y_min + 1;
            rw >= 2 * side + 1 || rh >= 2 * side + 1
        };
        let Some(idx) = (0..rooms.len())
            .filter(|&i| splittable(&rooms[i]))
            .max_by_key(|&i| {
                let r = rooms[i];
                ((r.x_max - r.x_min + 1) * (r.y_max - r.y_min + 1), std::cmp::Reverse(i))
            })
        else {
            break;
        };
        let r = rooms.swap_remove(idx);
        let rw = r.x_max - r.x_min + 1;
        let rh = r.y_max - r.y_min + 1;
        let vertical = if rw >= 2 * side + 1 && rh >= 2 * side + 1 {
            rw >= rh
        } else {
            rw >= 2 * side + 1
        };
        let door = cfg.door_width as i32;
        if vertical {
            let wx = rng.random_range(r.x_min + side..=r.x_max - side);
            let d0 = rng.random_range(r.y_min + 1..=r.y_max - door);
            for y in r.y_min..=r.y_max {
                if y < d0 || y >= d0 + door {
                    canvas.set(wx, y, true);
                }
            }
            rooms.push(CellRect { x_max: wx - 1, ..r });
            rooms.push(CellRect { x_min: wx + 1, ..r });
        } else {
            let wy = rng.random_range(r.y_min + side..=r.y_max - side);
            let d0 = rng.random_range(r.x_min + 1..=r.x_max - door);
            for x in r.x_min..=r.x_max {
                if x < d0 || x >= d0 + door {
                    canvas.set(x, wy, true);
                }
            }
            rooms.push(CellRect { y_max: wy - 1, ..r });
            rooms.push(CellRect { y_min: wy + 1, ..r });
        }
    }
    if rooms.len() < cfg.min_rooms || !canvas.well_connected() {
        return Ok(None);
    }

    // Furniture blocks, each accepted only if connectivity survives.
    let max_side = cfg.max_block_side as i32;
    let mut failures = 0;
    while canvas.interior_fraction() < cfg.clutter_density {
        if failures > 400 {
            break;
        }
        let bw = rng.random_range(1..=max_side);
        let bh = rng.random_range(1..=max_side);
        let x0 = rng.random_range(1..=(w as i32 - 1 - bw).max(1));
        let y0 = rng.random_range(1..=(h as i32 - 1 - bh).max(1));
        let mut placed = Vec::new();
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                if !canvas.get(x, y) {
                    canvas.set(x, y, true);
                    placed.push((x, y));
                }
            }
        }
        if placed.is_empty() {
            failures += 1;
            continue;
        }
        if !canvas.well_connected() {
            for (x, y) in placed {
                canvas.set(x, y, false);
            }
            failures += 1;
        }
    }
    if (canvas.interior_fraction() - cfg.clutter_density).abs() > 0.1 && cfg.clutter_density > 0.0 {
        return Ok(None);
    }

    let map = WorldMap::new(cfg.cell_size, w, h, canvas.occ)?.with_spawn_region(Some(CellRect {
        x_min: 1,
        y_min: 1,
        x_max: w as i32 - 2,
        y_max: h as i32 - 2,
    }));
    debug_assert!(map.free_space_connected());
    Ok(Some(map))
}

/// Clear cells of `map` inside its spawn region: safe spawn points for a
/// one-cell-radius agent.
pub fn spawn_cells(map: &WorldMap) -> Vec<Cell> {
    let region = map.spawn_region();
    map.free_cells()
        .filter(|c| region.is_none_or(|r| r.contains(*c)))
        .filter(|c| map.is_clear(*c))
        .collect()
}
