use serde::Serialize;

use super::Rearrangement;
use crate::error::{Error, Result};
use crate::numerics::{classify_improper, integrate_adaptive, Convergence, SingularEnd, TableKind, Tabulated};

/// Cell-wise constant function on `(0, T)` with cell weights `A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    edges: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl SampledFn {
    pub fn new(edges: Vec<f64>, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if edges.len() != values.len() + 1 || values.len() != weights.len() || values.is_empty() {
            return Err(Error::InvalidInput(
                "sampled function needs n+1 edges, n values and n weights".into(),
            ));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("cell edges must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("cell weights must be finite and non-negative".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled values must be finite".into()));
        }
        let out = SampledFn { edges, values, weights };
        if !(out.total_mass() > 0.0) {
            return Err(Error::InvalidInput("total weighted mass must be positive".into()));
        }
        Ok(out)
    }

    /// Unit weights on `n` equal cells of `(0, length)`.
    pub fn uniform(length: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let edges = (0..=n).map(|i| length * i as f64 / n as f64).collect();
        SampledFn::new(edges, values, vec![1.0; n])
    }

    /// Cell-midpoint samples of `f` on `n` equal cells, weights from `weight` at midpoints.
    pub fn from_fn<F: Fn(f64) -> f64, W: Fn(f64) -> f64>(length: f64, n: usize, f: F, weight: W) -> Result<Self> {
        let edges: Vec<f64> = (0..=n).map(|i| length * i as f64 / n as f64).collect();
        let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        SampledFn::new(edges, mids.iter().map(|&t| f(t)).collect(), mids.iter().map(|&t| weight(t)).collect())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell masses `A_i Δt_i`.
    pub fn masses(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .zip(&self.weights)
            .map(|(e, a)| a * (e[1] - e[0]))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    /// Same cells, values mapped through `f`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        SampledFn {
            edges: self.edges.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Cell-wise combination with a function on the same cells.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &SampledFn, f: F) -> Result<Self> {
        if self.edges != other.edges || self.weights != other.weights {
            return Err(Error::InvalidInput("functions must share cells and weights".into()));
        }
        Ok(SampledFn {
            edges: self.edges.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            weights: self.weights.clone(),
        })
    }

    /// `∫ |u|^q A dt` to the power `1/q`, or `max |u|` for `q = ∞`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        self.values
            .iter()
            .zip(self.masses())
            .map(|(v, m)| v.abs().powf(q) * m)
            .sum::<f64>()
            .powf(1.0 / q)
    }

    /// `∫ u A dt`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.masses()).map(|(v, m)| v * m).sum()
    }
}

/// `μ_u(t)`: weighted measure of `{|u| >= t}`.
pub fn distribution_function(u: &SampledFn, t: f64) -> f64 {
    u.values
        .iter()
        .zip(u.masses())
        .filter(|(v, _)| v.abs() >= t)
        .map(|(_, m)| m)
        .sum()
}

/// Decreasing rearrangement of the signed values: `sup{t : |{u > t}| >= s}`
/// read through the `>=` level sets. Breaks are cumulative masses.
fn sorted_pairs(values: &[f64], masses: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| masses[i] > 0.0).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut breaks = Vec::with_capacity(idx.len() + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(idx.len());
    breaks.push(0.0);
    let mut acc = 0.0;
    for i in idx {
        acc += masses[i];
        // Merge cells with equal values into one piece.
        if vals.last() == Some(&values[i]) {
            *breaks.last_mut().unwrap() = acc;
        } else {
            vals.push(values[i]);
            breaks.push(acc);
        }
    }
    (breaks, vals)
}

/// `u*` by sorting `(|u_i|, A_i Δt_i)` pairs.
pub fn decreasing_rearrangement(u: &SampledFn) -> Rearrangement {
    let abs: Vec<f64> = u.values.iter().map(|v| v.abs()).collect();
    let (breaks, values) = sorted_pairs(&abs, &u.masses());
    Rearrangement::step(breaks, values).expect("sorted absolute values form a rearrangement")
}

/// Non-increasing rearrangement of `u` itself (values may be negative),
/// returned as `(breaks, values)` with the convention of [`Rearrangement::step`].
pub fn signed_rearrangement(u: &SampledFn) -> (Vec<f64>, Vec<f64>) {
    sorted_pairs(&u.values, &u.masses())
}

/// Increasing rearrangement `u_*(s) = u*(M - s)`.
pub fn increasing_rearrangement(u: &SampledFn) -> impl Fn(f64) -> f64 {
    let r = decreasing_rearrangement(u);
    let m = r.mass();
    move |s: f64| r.eval(m - s)
}

/// `med(u) = sup{t : |{u > t}| >= M/2}`.
pub fn median(u: &SampledFn) -> f64 {
    let (breaks, values) = signed_rearrangement(u);
    let half = 0.5 * breaks.last().unwrap();
    let j = breaks[1..].partition_point(|&b| b < half);
    values[j.min(values.len() - 1)]
}

/// `(u_+, u_-)` with `u = u_+ - u_-`.
pub fn pos_neg_split(u: &SampledFn) -> (SampledFn, SampledFn) {
    (u.map(|v| v.max(0.0)), u.map(|v| (-v).max(0.0)))
}

/// `u*` obtained by inverting the distribution function, independently of the sort.
#[derive(Debug, Clone)]
pub struct InversionRearrangement {
    table: Tabulated,
    mass: f64,
}

impl InversionRearrangement {
    pub fn eval(&self, s: f64) -> f64 {
        if s > self.mass {
            return 0.0;
        }
        -self.table.left_inverse(s).value
    }
}

/// Level-set inversion: tabulate `x -> μ_u(-x)` at the distinct levels and
/// take its generalized left inverse.
pub fn rearrangement_by_inversion(u: &SampledFn) -> InversionRearrangement {
    let mut levels: Vec<f64> = u.values.iter().map(|v| v.abs()).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let xs: Vec<f64> = levels.iter().map(|l| -l).collect();
    let ys: Vec<f64> = levels.iter().map(|&l| distribution_function(u, l)).collect();
    InversionRearrangement {
        table: Tabulated::new(xs, ys, TableKind::Step),
        mass: u.total_mass(),
    }
}

/// `‖u‖_{L^{σ,ϱ}} = (∫_0^M (s^{1/σ} u*(s))^ϱ ds/s)^{1/ϱ}`, exact on step functions.
pub fn lorentz_norm(u: &SampledFn, sigma: f64, rho: f64) -> f64 {
    let r = decreasing_rearrangement(u);
    let e = rho / sigma;
    let b = r.breaks();
    let acc: f64 = r
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| v.powf(rho) * (b[j + 1].powf(e) - b[j].powf(e)) / e)
        .sum();
    acc.powf(1.0 / rho)
}

/// Lorentz norm of a non-increasing `f*` on `(0, mass)`; infinite when the
/// defining integral diverges at `s -> 0`.
pub fn lorentz_norm_of<F: Fn(f64) -> f64>(f_star: F, mass: f64, sigma: f64, rho: f64) -> Result<f64> {
    let g = |s: f64| (s.powf(1.0 / sigma) * f_star(s)).powf(rho) / s;
    let split = 0.5 * mass;
    let head = classify_improper(&g, 0.0, split, SingularEnd::Left)?;
    match head.status {
        Convergence::Converges => {
            let rest = integrate_adaptive(&g, split, mass, 1e-10)?;
            Ok((head.value + rest).powf(1.0 / rho))
        }
        Convergence::Diverges => Ok(f64::INFINITY),
        Convergence::Indeterminate => Err(Error::Unsupported(
            "Lorentz integrand is too close to the integrability threshold".into(),
        )),
    }
}

/// `sup_s ω(s) u*(s)`; for non-decreasing `ω` the sup over each step is at its right end.
pub fn marcinkiewicz_norm<W: Fn(f64) -> f64>(u: &SampledFn, omega: W) -> f64 {
    let r = decreasing_rearrangement(u);
    r.values()
        .iter()
        .zip(&r.breaks()[1..])
        .map(|(v, &m)| omega(m) * v)
        .fold(0.0, f64::max)
}

/// `sup_s ω(s) f*(s)` for closed-form `f*` on `(0, mass)`.
pub fn marcinkiewicz_norm_of<F: Fn(f64) -> f64, W: Fn(f64) -> f64>(f_star: F, omega: W, mass: f64) -> Result<f64> {
    let v = crate::numerics::classify_sup(|s| omega(s) * f_star(s), 0.0, mass, SingularEnd::Left)?;
    match v.status {
        Convergence::Converges => Ok(v.value),
        Convergence::Diverges => Ok(f64::INFINITY),
        Convergence::Indeterminate => Err(Error::Unsupported(
            "Marcinkiewicz product is too close to the boundedness threshold".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyLittlewoodReport {
    /// `∫ u* v_*`
    pub lower: f64,
    /// `∫ |u v|`
    pub middle: f64,
    /// `∫ u* v*`
    pub upper: f64,
    pub holds: bool,
}

pub const HL_SLACK: f64 = 1e-10;

/// Exact integral of the product of two step functions of mass.
fn product_integral(a: &Rearrangement, b: impl Fn(f64) -> f64, extra_breaks: &[f64]) -> f64 {
    let mut pts: Vec<f64> = a.breaks().iter().chain(extra_breaks).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            a.eval(mid) * b(mid) * (w[1] - w[0])
        })
        .sum()
}

/// Checks `∫ u* v_* <= ∫ |uv| <= ∫ u* v*`.
pub fn check_hardy_littlewood(u: &SampledFn, v: &SampledFn) -> Result<HardyLittlewoodReport> {
    let uv = u.zip_with(v, |a, b| (a * b).abs())?;
    let middle = uv.integral();
    let us = decreasing_rearrangement(u);
    let vs = decreasing_rearrangement(v);
    let m = us.mass();
    let upper = product_integral(&us, |s| vs.eval(s), vs.breaks());
    let reflected: Vec<f64> = vs.breaks().iter().map(|b| m - b).collect();
    let lower = product_integral(&us, |s| vs.eval(m - s), &reflected);
    let slack = HL_SLACK * upper.abs().max(1.0);
    Ok(HardyLittlewoodReport {
        lower,
        middle,
        upper,
        holds: middle - lower >= -slack && upper - middle >= -slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubadditivityReport {
    /// `max_s (u+v)*(s) - u*(s/2) - v*(s/2)`, non-positive when the sum surrogate holds.
    pub worst_sum_gap: f64,
    /// `max_s (uv)*(s) - u*(s/2) v*(s/2)`.
    pub worst_product_gap: f64,
    pub points: usize,
    pub holds: bool,
}

/// Checks `(u+v)*(s) <= u*(s/2) + v*(s/2)` and `(uv)*(s) <= u*(s/2) v*(s/2)`
/// at the right end of every piece of the merged partition, where both sides
/// are constant on the piece and the right side is smallest.
pub fn check_subadditivity_surrogates(u: &SampledFn, v: &SampledFn) -> Result<SubadditivityReport> {
    let sum = decreasing_rearrangement(&u.zip_with(v, |a, b| a + b)?);
    let prod = decreasing_rearrangement(&u.zip_with(v, |a, b| a * b)?);
    let us = decreasing_rearrangement(u);
    let vs = decreasing_rearrangement(v);
    let m = us.mass();
    let mut pts: Vec<f64> = sum
        .breaks()
        .iter()
        .chain(prod.breaks())
        .copied()
        .chain(us.breaks().iter().map(|b| 2.0 * b))
        .chain(vs.breaks().iter().map(|b| 2.0 * b))
        .filter(|&s| s > 0.0 && s <= m)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let scale = us.max().max(vs.max()).max(1.0);
    let mut worst_sum = f64::NEG_INFINITY;
    let mut worst_prod = f64::NEG_INFINITY;
    for &s in &pts {
        let (a, b) = (us.eval(s / 2.0), vs.eval(s / 2.0));
        worst_sum = worst_sum.max(sum.eval(s) - a - b);
        worst_prod = worst_prod.max(prod.eval(s) - a * b);
    }
    let tol = HL_SLACK * scale * scale;
    Ok(SubadditivityReport {
        worst_sum_gap: worst_sum,
        worst_product_gap: worst_prod,
        points: pts.len(),
        holds: worst_sum <= tol && worst_prod <= tol,
    })
}
