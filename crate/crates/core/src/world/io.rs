//! Plain-text map format.
//!
//! ```text
//! ; comment lines start with ';'
//! cell_size 0.1          ; meters per cell edge
//! width 6                ; cells
//! height 4               ; cells
//! spawn_region 1 1 4 2   ; optional, inclusive cell bounds x_min y_min x_max y_max
//! grid
//! ######
//! #..#.#
//! #....#
//! ######
//! ```
//!
//! Rows after `grid` are listed top (largest y) to bottom; `#` is occupied
//! and `.` is free.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::{CellRect, GridMap, MetricGrid, WorldError, WorldMap};

#[derive(Debug, thiserror::Error)]
pub enum MapParseError {
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("missing header field `{0}`")]
    MissingField(&'static str),
    #[error("line {line}: row has {found} cells, expected {expected}")]
    RowWidth {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unknown cell glyph {glyph:?}")]
    UnknownGlyph { line: usize, glyph: char },
    #[error("expected {expected} grid rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("invalid map: {0}")]
    Invalid(#[from] WorldError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub fn map_to_text(map: &WorldMap) -> String {
    let mut out = String::new();
    out.push_str("; navbench map\n");
    out.push_str("; cell_size in meters, width/height in cells, rows top to bottom\n");
    let _ = writeln!(out, "cell_size {}", map.cell_size());
    let _ = writeln!(out, "width {}", map.width());
    let _ = writeln!(out, "height {}", map.height());
    if let Some(r) = map.spawn_region() {
        let _ = writeln!(out, "spawn_region {} {} {} {}", r.x_min, r.y_min, r.x_max, r.y_max);
    }
    out.push_str("grid\n");
    let occ = map.occupancy();
    for y in (0..map.height()).rev() {
        for x in 0..map.width() {
            out.push(if occ[y * map.width() + x] { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split(';').next().unwrap_or("").trim()
}

pub fn map_from_text(text: &str) -> Result<WorldMap, MapParseError> {
    let mut cell_size = None;
    let mut width = None;
    let mut height = None;
    let mut spawn = None;
    let mut lines = text.lines().enumerate();
    let mut saw_grid = false;

    for (i, raw) in lines.by_ref() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if line == "grid" {
            saw_grid = true;
            break;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let vals: Vec<&str> = parts.collect();
        let header_err = |message: String| MapParseError::Header { line: line_no, message };
        let one = |field: &str| -> Result<&str, MapParseError> {
            match vals.as_slice() {
                [v] => Ok(*v),
                _ => Err(header_err(format!("field `{field}` takes exactly one value"))),
            }
        };
        match key {
            "cell_size" => {
                let v = one(key)?;
                cell_size = Some(v.parse::<f64>().map_err(|_| header_err(format!("field `cell_size`: bad number {v:?}")))?);
            }
            "width" | "height" => {
                let v = one(key)?;
                let n = v.parse::<usize>().map_err(|_| header_err(format!("field `{key}`: bad count {v:?}")))?;
                if key == "width" {
                    width = Some(n);
                } else {
                    height = Some(n);
                }
            }
            "spawn_region" => {
                let nums: Result<Vec<i32>, _> = vals.iter().map(|v| v.parse::<i32>()).collect();
                match nums.as_deref() {
                    Ok([a, b, c, d]) => {
                        spawn = Some(CellRect {
                            x_min: *a,
                            y_min: *b,
                            x_max: *c,
                            y_max: *d,
                        })
                    }
                    _ => return Err(header_err("field `spawn_region` takes four integers".into())),
                }
            }
            other => return Err(header_err(format!("unknown header field `{other}`"))),
        }
    }
    if !saw_grid {
        return Err(MapParseError::MissingField("grid"));
    }
    let cell_size = cell_size.ok_or(MapParseError::MissingField("cell_size"))?;
    let width = width.ok_or(MapParseError::MissingField("width"))?;
    let height = height.ok_or(MapParseError::MissingField("height"))?;

    let mut rows = Vec::with_capacity(height);
    for (i, raw) in lines {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(width);
        for ch in line.chars() {
            match ch {
                '#' => row.push(true),
                '.' => row.push(false),
                glyph => return Err(MapParseError::UnknownGlyph { line: i + 1, glyph }),
            }
        }
        if row.len() != width {
            return Err(MapParseError::RowWidth {
                line: i + 1,
                expected: width,
                found: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.len() != height {
        return Err(MapParseError::RowCount {
            expected: height,
            found: rows.len(),
        });
    }
    let mut occ = vec![false; width * height];
    for (r, row) in rows.into_iter().enumerate() {
        let y = height - 1 - r;
        occ[y * width..(y + 1) * width].copy_from_slice(&row);
    }
    Ok(WorldMap::new(cell_size, width, height, occ)?.with_spawn_region(spawn))
}

pub fn save_map(map: &WorldMap, path: impl AsRef<Path>) -> Result<(), MapParseError> {
    std::fs::write(path, map_to_text(map))?;
    Ok(())
}

pub fn load_map(path: impl AsRef<Path>) -> Result<WorldMap, MapParseError> {
    map_from_text(&std::fs::read_to_string(path)?)
}
