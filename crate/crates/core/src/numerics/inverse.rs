//! Generalized left-continuous inverses of monotone functions.

/// Result of inverting a monotone function at a level outside or inside its range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub value: f64,
    /// `y` was at or below the infimum of `F`; `value` is the left endpoint.
    pub below_range: bool,
    /// `y` exceeded the supremum of `F`; `value` is the right endpoint.
    pub above_range: bool,
}

impl Inverse {
    fn inside(value: f64) -> Self {
        Inverse {
            value,
            below_range: false,
            above_range: false,
        }
    }
}

/// `sup{s in [lo, hi] : F(s) < y}` for non-decreasing `F`, by bisection.
pub fn generalized_left_inverse<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, y: f64) -> Inverse {
    if !(f(lo) < y) {
        return Inverse {
            value: lo,
            below_range: true,
            above_range: false,
        };
    }
    if f(hi) < y {
        return Inverse {
            value: hi,
            below_range: false,
            above_range: true,
        };
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            break;
        }
        if f(mid) < y {
            a = mid;
        } else {
            b = mid;
        }
    }
    Inverse::inside(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// `F(x) = ys[i]` on `[xs[i], xs[i+1])`.
    Step,
    /// Linear interpolation between nodes.
    Linear,
}

/// A non-decreasing function given by a table of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub kind: TableKind,
}

impl Tabulated {
    /// Panics unless `xs` is non-decreasing, `ys` is non-decreasing and both
    /// have the same non-zero length.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, kind: TableKind) -> Self {
        assert_eq!(xs.len(), ys.len(), "table columns differ in length");
        assert!(!xs.is_empty(), "empty table");
        assert!(xs.windows(2).all(|w| w[0] <= w[1]), "table abscissae not sorted");
        assert!(ys.windows(2).all(|w| w[0] <= w[1]), "table values not non-decreasing");
        Tabulated { xs, ys, kind }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&v| v <= x);
        if i == 0 {
            return self.ys[0];
        }
        if i == self.xs.len() {
            return *self.ys.last().unwrap();
        }
        match self.kind {
            TableKind::Step => self.ys[i - 1],
            TableKind::Linear => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.ys[i - 1], self.ys[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// `sup{x : F(x) < y}` clamped to `[xs[0], xs[last]]`; exact on the table.
    pub fn left_inverse(&self, y: f64) -> Inverse {
        let n = self.xs.len();
        let i = self.ys.partition_point(|&v| v < y);
        if i == 0 {
            return Inverse {
                value: self.xs[0],
                below_range: self.ys[0] > y,
                above_range: false,
            };
        }
        if i == n {
            return Inverse {
                value: self.xs[n - 1],
                below_range: false,
                above_range: true,
            };
        }
        match self.kind {
            TableKind::Step => Inverse::inside(self.xs[i]),
            TableKind::Linear => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (y0, y1) = (self.ys[i - 1], self.ys[i]);
                Inverse::inside(x0 + (x1 - x0) * (y - y0) / (y1 - y0))
            }
        }
    }
}
