//! Exact rearrangement of continuous piecewise-linear functions with
//! cell-wise constant weights.

use super::Rearrangement;
use crate::error::{Error, Result};

/// One linear piece, reduced to what its distribution depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCell {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

/// Node values `u_i` at `t_i`, linear in between; cell `i` carries weight `A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || weights.len() + 1 != nodes.len() || weights.is_empty() {
            return Err(Error::InvalidInput(
                "piecewise-linear function needs n+1 nodes and values and n cell weights".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be non-negative and values finite".into()));
        }
        Ok(PiecewiseLinear { nodes, values, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn masses(&self) -> Vec<f64> {
        self.nodes
            .windows(2)
            .zip(&self.weights)
            .map(|(t, a)| a * (t[1] - t[0]))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.nodes.partition_point(|&x| x <= t).clamp(1, self.nodes.len() - 1);
        let (t0, t1) = (self.nodes[i - 1], self.nodes[i]);
        let (u0, u1) = (self.values[i - 1], self.values[i]);
        u0 + (u1 - u0) * (t - t0) / (t1 - t0)
    }

    /// `∫ u A dt`.
    pub fn integral(&self) -> f64 {
        self.values
            .windows(2)
            .zip(self.masses())
            .map(|(u, m)| 0.5 * (u[0] + u[1]) * m)
            .sum()
    }

    /// Cells with the sign structure resolved: each cell crossing zero is
    /// split there, then `f` is applied to the end values.
    fn cells<F: Fn(f64) -> f64>(&self, f: F) -> Vec<LinearCell> {
        let mut out = Vec::with_capacity(self.weights.len() + 8);
        let mut push = |a: f64, b: f64, m: f64| {
            let (fa, fb) = (f(a), f(b));
            out.push(LinearCell {
                lo: fa.min(fb),
                hi: fa.max(fb),
                mass: m,
            });
        };
        for (i, m) in self.masses().into_iter().enumerate() {
            let (a, b) = (self.values[i], self.values[i + 1]);
            if a * b < 0.0 {
                let theta = a / (a - b);
                push(a, 0.0, m * theta);
                push(0.0, b, m * (1.0 - theta));
            } else {
                push(a, b, m);
            }
        }
        out
    }

    /// `μ(t)`: weighted measure of `{|u| >= t}`, exact.
    pub fn distribution(&self, t: f64) -> f64 {
        distribution_of_cells(&self.cells(f64::abs), t)
    }

    /// Weighted measure of `{u >= t}` (signed), exact.
    pub fn upper_level_measure(&self, t: f64) -> f64 {
        distribution_of_cells(&self.cells(|v| v), t)
    }

    pub fn abs_rearrangement(&self) -> Rearrangement {
        rearrange_cells(&self.cells(f64::abs))
    }

    pub fn positive_part_rearrangement(&self) -> Rearrangement {
        rearrange_cells(&self.cells(|v| v.max(0.0)))
    }

    pub fn negative_part_rearrangement(&self) -> Rearrangement {
        rearrange_cells(&self.cells(|v| (-v).max(0.0)))
    }

    /// `med(u) = sup{t : |{u > t}| >= M/2}`.
    pub fn median(&self) -> f64 {
        let shift = self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let cells = self.cells(|v| v - shift);
        let r = rearrange_cells(&cells);
        r.eval(0.5 * r.mass()) + shift
    }
}

fn distribution_of_cells(cells: &[LinearCell], t: f64) -> f64 {
    cells
        .iter()
        .map(|c| {
            if c.lo >= t {
                c.mass
            } else if c.hi <= t {
                0.0
            } else {
                c.mass * (c.hi - t) / (c.hi - c.lo)
            }
        })
        .sum()
}

/// Segment tree of non-negative rates; sums are rebuilt from the children so
/// removals leave no rounding residue.
struct RateTree {
    size: usize,
    data: Vec<f64>,
}

impl RateTree {
    fn new(n: usize) -> Self {
        let size = n.next_power_of_two().max(1);
        RateTree {
            size,
            data: vec![0.0; 2 * size],
        }
    }

    fn set(&mut self, i: usize, v: f64) {
        let mut k = i + self.size;
        self.data[k] = v;
        while k > 1 {
            k /= 2;
            self.data[k] = self.data[2 * k] + self.data[2 * k + 1];
        }
    }

    fn total(&self) -> f64 {
        self.data[1]
    }
}

/// Decreasing rearrangement of non-negative linear cells by a sweep over the
/// distinct end values.
fn rearrange_cells(cells: &[LinearCell]) -> Rearrangement {
    let mass: f64 = cells.iter().map(|c| c.mass).sum();
    let mut levels: Vec<f64> = cells.iter().flat_map(|c| [c.lo, c.hi]).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    if levels.is_empty() || mass <= 0.0 {
        return Rearrangement::zero(mass.max(0.0));
    }
    let index = |v: f64| levels.partition_point(|&l| l > v);
    let k = levels.len();
    let mut jump = vec![0.0; k];
    let mut start: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut end: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (ci, c) in cells.iter().enumerate() {
        if c.mass <= 0.0 {
            continue;
        }
        let (ih, il) = (index(c.hi), index(c.lo));
        if ih == il {
            jump[ih] += c.mass;
        } else {
            start[ih].push(ci);
            end[il].push(ci);
        }
    }
    let mut tree = RateTree::new(cells.len());
    let mut s_nodes = vec![0.0];
    let mut v_nodes = vec![levels[0]];
    let mut mu = jump[0];
    if mu > 0.0 {
        s_nodes.push(mu);
        v_nodes.push(levels[0]);
    }
    for j in 0..k - 1 {
        for &ci in &end[j] {
            tree.set(ci, 0.0);
        }
        for &ci in &start[j] {
            let c = cells[ci];
            tree.set(ci, c.mass / (c.hi - c.lo));
        }
        let before_jump = mu + (levels[j] - levels[j + 1]) * tree.total();
        s_nodes.push(before_jump);
        v_nodes.push(levels[j + 1]);
        mu = before_jump + jump[j + 1];
        if jump[j + 1] > 0.0 {
            s_nodes.push(mu);
            v_nodes.push(levels[j + 1]);
        }
    }
    // Remove rounding drift: the last break is the total mass.
    let drift = mass / *s_nodes.last().unwrap();
    for s in s_nodes.iter_mut() {
        *s = (*s * drift).min(mass);
    }
    *s_nodes.last_mut().unwrap() = mass;
    Rearrangement::linear(s_nodes, v_nodes).expect("sweep produces a valid rearrangement")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sampled(n: usize, f: impl Fn(f64) -> f64) -> PiecewiseLinear {
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let values = nodes.iter().map(|&t| f(t)).collect();
        PiecewiseLinear::new(nodes, values, vec![1.0; n]).unwrap()
    }

    #[test]
    fn ramp_is_its_own_rearrangement() {
        let u = sampled(7, |t| 1.0 - t);
        let r = u.abs_rearrangement();
        for s in [0.0, 0.13, 0.5, 0.99] {
            assert!((r.eval(s) - (1.0 - s)).abs() < 1e-15);
        }
        assert!((u.median() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cos_rearrangement_is_exact_up_to_interpolation() {
        let n = 2000;
        let u = sampled(n, |t| (2.0 * PI * t).cos());
        let r = u.abs_rearrangement();
        for k in 1..10 {
            let s = k as f64 / 10.0;
            assert!((r.eval(s) - (0.5 * PI * s).cos()).abs() < 1e-5);
        }
        assert!(u.median().abs() < 1e-12);
        let p = u.positive_part_rearrangement();
        assert!((p.eval(0.3) - (PI * 0.3).cos()).abs() < 1e-5);
        assert!(p.eval(0.6).abs() < 1e-15);
    }

    #[test]
    fn distribution_matches_rearrangement() {
        let u = sampled(333, |t| (7.0 * t).sin() + 0.3 * t);
        let r = u.abs_rearrangement();
        for k in 1..40 {
            let s = k as f64 / 40.0;
            let t = r.eval(s);
            assert!((u.distribution(t) - s).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn flat_pieces_become_jumps() {
        let nodes = vec![0.0, 0.25, 0.5, 1.0];
        let u = PiecewiseLinear::new(nodes, vec![1.0, 1.0, 0.0, 0.0], vec![1.0, 2.0, 1.0]).unwrap();
        let r = u.abs_rearrangement();
        assert!((r.mass() - 1.25).abs() < 1e-15);
        assert_eq!(r.eval(0.2), 1.0);
        assert!((r.eval(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(r.eval(1.0), 0.0);
        assert!((u.integral() - 0.5).abs() < 1e-15);
    }
}
