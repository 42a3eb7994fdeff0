use crate::error::{Error, Result};

/// Strictly increasing nodes inside `(0, mass)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    mass: f64,
}

impl Grid {
    pub fn new(nodes: Vec<f64>, mass: f64) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("a grid needs at least two nodes".into()));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidInput(format!("grid mass must be positive, got {mass}")));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("grid nodes must be strictly increasing".into()));
        }
        if !(nodes[0] > 0.0 && *nodes.last().unwrap() < mass) {
            return Err(Error::InvalidInput(format!("grid nodes must lie in (0, {mass})")));
        }
        Ok(Grid { nodes, mass })
    }

    /// `k / count * upper` for `k = 1..count`, i.e. `count - 1` interior nodes of `(0, upper)`.
    pub fn uniform_interior(upper: f64, count: usize, mass: f64) -> Result<Self> {
        Grid::new((1..count).map(|k| upper * k as f64 / count as f64).collect(), mass)
    }

    /// `n` log-spaced nodes from `lo` to `hi`.
    pub fn logarithmic(lo: f64, hi: f64, n: usize, mass: f64) -> Result<Self> {
        Grid::new(log_space(lo, hi, n), mass)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(vec![0.1], 1.0).is_err());
        assert!(Grid::new(vec![0.2, 0.1], 1.0).is_err());
        assert!(Grid::new(vec![0.0, 0.1], 1.0).is_err());
        assert!(Grid::new(vec![0.5, 1.0], 1.0).is_err());
        assert!(Grid::new(vec![0.1, 0.5], 1.0).is_ok());
    }

    #[test]
    fn spaces_hit_endpoints() {
        let l = log_space(1e-6, 0.5, 50);
        assert_eq!(l[0], 1e-6);
        assert_eq!(l[49], 0.5);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        let g = Grid::uniform_interior(0.5, 10, 1.0).unwrap();
        assert_eq!(g.len(), 9);
        assert!((g.nodes()[4] - 0.25).abs() < 1e-15);
    }
}
