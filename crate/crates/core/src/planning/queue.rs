//! Exact path costs and search keys.
//!
//! Every path cost on the grid is `a + b·√2` for integers `a`, `b`, and so
//! is the octile heuristic. Keeping costs in that form makes key ties
//! exact, which D* Lite's termination test relies on.

use std::cmp::Ordering;
use std::f64::consts::SQRT_2;

use crate::world::Cell;

/// `ones + roots·√2`, or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cost {
    ones: i64,
    roots: i64,
}

impl Cost {
    pub const ZERO: Cost = Cost { ones: 0, roots: 0 };
    pub const AXIS: Cost = Cost { ones: 1, roots: 0 };
    pub const DIAGONAL: Cost = Cost { ones: 0, roots: 1 };
    pub const INF: Cost = Cost {
        ones: i64::MAX,
        roots: i64::MAX,
    };

    pub fn is_inf(self) -> bool {
        self == Self::INF
    }

    pub fn is_finite(self) -> bool {
        !self.is_inf()
    }

    pub fn to_f64(self) -> f64 {
        if self.is_inf() {
            f64::INFINITY
        } else {
            self.ones as f64 + self.roots as f64 * SQRT_2
        }
    }

    /// Octile distance between two cells.
    pub fn octile(a: Cell, b: Cell) -> Cost {
        let dx = i64::from((a.x - b.x).abs());
        let dy = i64::from((a.y - b.y).abs());
        let (hi, lo) = if dx > dy { (dx, dy) } else { (dy, dx) };
        Cost { ones: hi - lo, roots: lo }
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        if self.is_inf() || rhs.is_inf() {
            Cost::INF
        } else {
            Cost {
                ones: self.ones + rhs.ones,
                roots: self.roots + rhs.roots,
            }
        }
    }
}

impl std::ops::AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        *self = *self + rhs;
    }
}

/// Sign of `a + b·√2`, exactly.
fn sign(a: i64, b: i64) -> Ordering {
    match (a.cmp(&0), b.cmp(&0)) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
        (Ordering::Less, Ordering::Less) => Ordering::Less,
        (sa, _) => {
            let a2 = i128::from(a) * i128::from(a);
            let b2 = 2 * i128::from(b) * i128::from(b);
            // |a| vs |b|√2 decides; the pair can never balance exactly.
            if a2 > b2 {
                sa
            } else {
                sa.reverse()
            }
        }
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_inf(), other.is_inf()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => sign(self.ones - other.ones, self.roots - other.roots),
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Two-part priority `(k1, k2)`, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Key(pub Cost, pub Cost);

/// Heap entry; ties on the key fall back to the node index so pops are
/// deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Entry {
    pub key: Key,
    pub index: usize,
}
