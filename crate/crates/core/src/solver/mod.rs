//! Exact oracle for the weighted one-dimensional p-Laplace Neumann problem
//!
//! ```text
//! -(A |u'|^{p-2} u')' = A f  on (0, T),   A |u'|^{p-2} u' = 0 at 0 and T,
//! ```
//!
//! which is what the Neumann problem on balls, cusps and the interval model
//! reduces to for data depending on the profile coordinate only. One
//! integration gives `A |u'|^{p-2} u' = -F` with `F(t) = ∫_0^t A f`, so
//! `u' = -sign(F) |F/A|^{1/(p-1)}` and the zero-flux conditions hold because
//! `F(0) = F(T) = 0`.

mod data;
mod levels;
mod verify;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::RealFn;
use crate::rearrange::{decreasing_rearrangement, PiecewiseLinear, RearrangedDatum, Rearrangement, SampledFn, Sign};

pub use data::{named_datum, NAMED_DATA};
pub use levels::{level_flux, psi_function, sample_levels};
pub use verify::{
    convergence_study, stability_sample, verify_bound, verify_coarea, verify_flux_inequality, verify_isocap_levelset,
    verify_stability, verify_stability_family, BoundMode, CheckReport, ConvergenceStudy, StabilityFamily,
    StabilityReport, StabilitySample,
};

pub const COMPATIBILITY_TOL: f64 = 1e-10;
pub const DEFAULT_CELLS: usize = 10_000;

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Three-point Gauss–Legendre rule on `[a, b]`.
fn gl3<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * GL3_X.iter().zip(GL3_W).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// A right-hand side `f` with the points where it may jump.
#[derive(Clone)]
pub struct Datum {
    pub f: RealFn,
    pub breaks: Vec<f64>,
    pub label: String,
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Datum")
            .field("label", &self.label)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl Datum {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(label: &str, f: F) -> Self {
        Datum {
            f: Arc::new(f),
            breaks: Vec::new(),
            label: label.to_string(),
        }
    }

    pub fn with_breaks(mut self, mut breaks: Vec<f64>) -> Self {
        breaks.sort_by(f64::total_cmp);
        self.breaks = breaks;
        self
    }

    pub fn zero() -> Self {
        Datum::new("zero", |_| 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// `t f`.
    pub fn scaled(&self, t: f64) -> Self {
        let f = self.f.clone();
        Datum {
            f: Arc::new(move |x| t * f(x)),
            breaks: self.breaks.clone(),
            label: format!("{} * {t}", self.label),
        }
    }

    /// `self + eps * other`.
    pub fn perturbed(&self, other: &Datum, eps: f64) -> Self {
        let (f, g) = (self.f.clone(), other.f.clone());
        let mut breaks = self.breaks.clone();
        breaks.extend(&other.breaks);
        Datum {
            f: Arc::new(move |x| f(x) + eps * g(x)),
            breaks: Vec::new(),
            label: format!("{} + {eps} * {}", self.label, other.label),
        }
        .with_breaks(breaks)
    }

    /// `∫_a^b g` split at the datum's breaks.
    fn piecewise<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64) -> f64 {
        let lo = self.breaks.partition_point(|&x| x <= a);
        let hi = self.breaks.partition_point(|&x| x < b);
        let mut total = 0.0;
        let mut left = a;
        for &x in &self.breaks[lo..hi] {
            total += gl3(&g, left, x);
            left = x;
        }
        total + gl3(&g, left, b)
    }
}

/// Uniform grid of `cells` cells on `(0, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverGrid {
    pub length: f64,
    pub cells: usize,
}

impl SolverGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) || cells < 2 {
            return Err(Error::InvalidInput(format!(
                "solver grid needs a positive length and at least 2 cells, got ({length}, {cells})"
            )));
        }
        Ok(SolverGrid { length, cells })
    }

    pub fn step(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells)
            .map(|i| {
                if i == self.cells {
                    self.length
                } else {
                    self.length * i as f64 / self.cells as f64
                }
            })
            .collect()
    }

    pub fn refined(&self) -> Self {
        SolverGrid {
            length: self.length,
            cells: 2 * self.cells,
        }
    }
}

/// `sign(y) |y|^e`.
fn signed_pow(y: f64, e: f64) -> f64 {
    y.signum() * y.abs().powf(e)
}

#[derive(Clone)]
pub struct NeumannSolution {
    pub grid: SolverGrid,
    pub nodes: Vec<f64>,
    pub p: f64,
    /// `u` at the nodes, median-normalized.
    pub u: Vec<f64>,
    /// `u'` at the nodes; at an end where `A` vanishes, the adjacent cell value.
    pub du: Vec<f64>,
    /// `u'` at the cell midpoints; `u` is the running sum of `h * cell_gradient`.
    pub cell_gradient: Vec<f64>,
    /// `∫_cell A`.
    pub cell_mass: Vec<f64>,
    /// `F = ∫_0^t A f` at the nodes, after removing the compatibility residual.
    pub flux: Vec<f64>,
    pub compatibility_residual: f64,
    pub median_normalized: bool,
    /// Constant subtracted to normalize the median.
    pub median_shift: f64,
    weight: RealFn,
    datum: Datum,
    // F(T) before correction and the total mass, for flux evaluation off the grid.
    raw_total: f64,
    measure: f64,
    cumulative_mass: Vec<f64>,
}

impl fmt::Debug for NeumannSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NeumannSolution")
            .field("grid", &self.grid)
            .field("p", &self.p)
            .field("datum", &self.datum.label)
            .field("compatibility_residual", &self.compatibility_residual)
            .field("median_shift", &self.median_shift)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub median_normalize: bool,
    pub compatibility_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            median_normalize: true,
            compatibility_tol: COMPATIBILITY_TOL,
        }
    }
}

/// Solves the weighted Neumann problem on `grid` and normalizes `med(u) = 0`.
pub fn solve_weighted_neumann(weight: &RealFn, p: f64, datum: &Datum, grid: SolverGrid) -> Result<NeumannSolution> {
    solve_with(weight, p, datum, grid, SolveOptions::default())
}

pub fn solve_with(weight: &RealFn, p: f64, datum: &Datum, grid: SolverGrid, opts: SolveOptions) -> Result<NeumannSolution> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain("p > 1", format!("p = {p}")));
    }
    let nodes = grid.nodes();
    let n = grid.cells;
    let h = grid.step();
    let a = |t: f64| weight(t);
    let af = |t: f64| weight(t) * datum.eval(t);
    let af_abs = |t: f64| (weight(t) * datum.eval(t)).abs();

    let mut cell_mass = Vec::with_capacity(n);
    let mut cell_int = Vec::with_capacity(n);
    let mut half_int = Vec::with_capacity(n);
    let mut abs_total = 0.0;
    for j in 0..n {
        let (t0, t1) = (nodes[j], nodes[j + 1]);
        let mid = 0.5 * (t0 + t1);
        let am = a(mid);
        if !(am > 0.0) || !am.is_finite() {
            return Err(Error::domain(
                "A > 0 in the interior of (0, T)",
                format!("A({mid}) = {am}; a vanishing weight disconnects the domain"),
            ));
        }
        cell_mass.push(gl3(a, t0, t1));
        cell_int.push(datum.piecewise(af, t0, t1));
        half_int.push(datum.piecewise(af, t0, mid));
        abs_total += datum.piecewise(af_abs, t0, t1);
    }
    let mut raw = vec![0.0; n + 1];
    for j in 0..n {
        raw[j + 1] = raw[j] + cell_int[j];
    }
    let raw_total = raw[n];
    let residual = if abs_total > 0.0 { raw_total.abs() / abs_total } else { 0.0 };
    if !residual.is_finite() || residual > opts.compatibility_tol {
        return Err(Error::Incompatible {
            residual,
            tolerance: opts.compatibility_tol,
        });
    }
    let mut cumulative_mass = vec![0.0; n + 1];
    for j in 0..n {
        cumulative_mass[j + 1] = cumulative_mass[j] + cell_mass[j];
    }
    let measure = cumulative_mass[n];
    // Spread the (tiny) residual along the mass so that F(T) = 0 exactly.
    let flux: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                0.0
            } else {
                raw[i] - raw_total * cumulative_mass[i] / measure
            }
        })
        .collect();
    let e = 1.0 / (p - 1.0);
    let cell_gradient: Vec<f64> = (0..n)
        .map(|j| {
            let mid = 0.5 * (nodes[j] + nodes[j + 1]);
            let m_half = gl3(a, nodes[j], mid);
            let f_mid = raw[j] + half_int[j] - raw_total * (cumulative_mass[j] + m_half) / measure;
            -signed_pow(f_mid / a(mid), e)
        })
        .collect();
    let mut du: Vec<f64> = nodes
        .iter()
        .zip(&flux)
        .map(|(&t, &big_f)| {
            let at = a(t);
            if at > 0.0 {
                -signed_pow(big_f / at, e)
            } else {
                f64::NAN
            }
        })
        .collect();
    if du[0].is_nan() {
        du[0] = cell_gradient[0];
    }
    if du[n].is_nan() {
        du[n] = cell_gradient[n - 1];
    }
    if du.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(
            "A > 0 in the interior of (0, T)",
            "the weight vanishes at an interior node",
        ));
    }
    let mut u = vec![0.0; n + 1];
    for j in 0..n {
        u[j + 1] = u[j] + h * cell_gradient[j];
    }
    let mut sol = NeumannSolution {
        grid,
        nodes,
        p,
        u,
        du,
        cell_gradient,
        cell_mass,
        flux,
        compatibility_residual: residual,
        median_normalized: false,
        median_shift: 0.0,
        weight: weight.clone(),
        datum: datum.clone(),
        raw_total,
        measure,
        cumulative_mass,
    };
    if opts.median_normalize {
        let med = sol.piecewise_linear().median();
        for v in sol.u.iter_mut() {
            *v -= med;
        }
        sol.median_shift = med;
        sol.median_normalized = true;
    }
    Ok(sol)
}

/// Replaces `f` by `f - ∫A f / ∫A`, computed with the solver's own quadrature,
/// so that the compatibility condition holds to round-off.
pub fn project_compatible(weight: &RealFn, datum: &Datum, grid: SolverGrid) -> Datum {
    let nodes = grid.nodes();
    let (mut num, mut den) = (0.0, 0.0);
    for w in nodes.windows(2) {
        num += datum.piecewise(|t| weight(t) * datum.eval(t), w[0], w[1]);
        den += gl3(|t| weight(t), w[0], w[1]);
    }
    let c = num / den;
    let f = datum.f.clone();
    Datum {
        f: Arc::new(move |t| f(t) - c),
        breaks: datum.breaks.clone(),
        label: format!("{} (projected)", datum.label),
    }
}

impl NeumannSolution {
    pub fn weight(&self) -> &RealFn {
        &self.weight
    }

    pub fn datum(&self) -> &Datum {
        &self.datum
    }

    /// `∫_0^T A`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn cells(&self) -> usize {
        self.grid.cells
    }

    fn cell_of(&self, x: f64) -> usize {
        let h = self.grid.step();
        ((x / h).floor() as isize).clamp(0, self.grid.cells as isize - 1) as usize
    }

    /// `F(x) = ∫_0^x A f`, corrected like the nodal values.
    pub fn flux_at(&self, x: f64) -> f64 {
        let j = self.cell_of(x);
        let t0 = self.nodes[j];
        let w = &self.weight;
        let part = self.datum.piecewise(|t| w(t) * self.datum.eval(t), t0, x);
        let mass = self.cumulative_mass[j] + gl3(|t| w(t), t0, x);
        let raw_j = self.flux[j] + self.raw_total * self.cumulative_mass[j] / self.measure;
        raw_j + part - self.raw_total * mass / self.measure
    }

    /// `u'(x) = -sign(F) |F/A|^{1/(p-1)}` off the grid.
    pub fn gradient_at(&self, x: f64) -> f64 {
        -signed_pow(self.flux_at(x) / (self.weight)(x), 1.0 / (self.p - 1.0))
    }

    /// Nodal `u` with linear interpolation; cell densities are `∫_cell A / h`.
    pub fn piecewise_linear(&self) -> PiecewiseLinear {
        let h = self.grid.step();
        PiecewiseLinear::new(
            self.nodes.clone(),
            self.u.clone(),
            self.cell_mass.iter().map(|m| m / h).collect(),
        )
        .expect("solver nodes are valid")
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.piecewise_linear().eval(t)
    }

    /// `u_±*`.
    pub fn rearrangement(&self, sign: Sign) -> Rearrangement {
        let pl = self.piecewise_linear();
        match sign {
            Sign::Plus => pl.positive_part_rearrangement(),
            Sign::Minus => pl.negative_part_rearrangement(),
        }
    }

    /// Solve again on the grid refined by 2.
    pub fn refine(&self) -> Result<NeumannSolution> {
        solve_with(
            &self.weight,
            self.p,
            &self.datum,
            self.grid.refined(),
            SolveOptions {
                median_normalize: self.median_normalized,
                compatibility_tol: COMPATIBILITY_TOL,
            },
        )
    }

    /// Same problem, datum multiplied by `t`.
    pub fn rescaled_datum(&self, t: f64) -> Result<NeumannSolution> {
        solve_weighted_neumann(&self.weight, self.p, &self.datum.scaled(t), self.grid)
    }

    /// Zero-flux residuals `A |u'|^{p-1}` at `0` and `T`.
    pub fn end_flux(&self) -> (f64, f64) {
        (self.flux[0].abs(), self.flux[self.grid.cells].abs())
    }

    /// `f±*` of the solver's datum from cell averages on a grid `factor` times finer.
    pub fn datum_rearrangement(&self, q: f64, factor: usize) -> Result<RearrangedDatum> {
        datum_rearrangement(&self.weight, &self.datum, self.grid, q, factor)
    }

    /// `(t, u, u')` rows at the nodes.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.u)
            .zip(&self.du)
            .map(|((&t, &u), &du)| (t, u, du))
    }
}

/// Which part of `|u'|` to rearrange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientPart {
    All,
    Positive,
    Negative,
}

impl From<Sign> for GradientPart {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => GradientPart::Positive,
            Sign::Minus => GradientPart::Negative,
        }
    }
}

/// `|u'|` as a cell-wise constant function w.r.t. `A dt`, restricted to
/// `{u > 0}` or `{u < 0}`; cells where `u` changes sign are split at the zero.
pub fn gradient_sampled(sol: &NeumannSolution, part: GradientPart) -> SampledFn {
    let h = sol.grid.step();
    let mut edges = vec![sol.nodes[0]];
    let mut values = Vec::with_capacity(sol.cells());
    let mut weights = Vec::with_capacity(sol.cells());
    let keep = |v: f64| match part {
        GradientPart::All => true,
        GradientPart::Positive => v > 0.0,
        GradientPart::Negative => v < 0.0,
    };
    for j in 0..sol.cells() {
        let (u0, u1) = (sol.u[j], sol.u[j + 1]);
        let (t0, t1) = (sol.nodes[j], sol.nodes[j + 1]);
        let g = sol.cell_gradient[j].abs();
        let density = sol.cell_mass[j] / h;
        if part != GradientPart::All && u0 * u1 < 0.0 {
            let tz = t0 + (t1 - t0) * u0 / (u0 - u1);
            if tz > t0 && tz < t1 {
                edges.push(tz);
                values.push(if keep(u0) { g } else { 0.0 });
                weights.push(density);
                edges.push(t1);
                values.push(if keep(u1) { g } else { 0.0 });
                weights.push(density);
                continue;
            }
        }
        edges.push(t1);
        values.push(if keep(0.5 * (u0 + u1)) { g } else { 0.0 });
        weights.push(density);
    }
    SampledFn::new(edges, values, weights).expect("solver cells are valid")
}

/// `|u'|*` (or `|∇u_±|*`) w.r.t. the measure `A dt`.
pub fn weighted_gradient_rearrangement(sol: &NeumannSolution, part: GradientPart) -> Rearrangement {
    decreasing_rearrangement(&gradient_sampled(sol, part))
}

/// Rearrangements of `f`, `f_+`, `f_-` from exact cell averages (split at
/// the datum's breaks) on a grid `factor` times finer than `grid`.
pub fn datum_rearrangement(
    weight: &RealFn,
    datum: &Datum,
    grid: SolverGrid,
    q: f64,
    factor: usize,
) -> Result<RearrangedDatum> {
    let fine = SolverGrid::new(grid.length, grid.cells * factor.max(1))?;
    let nodes = fine.nodes();
    let h = fine.step();
    let mut abs_v = Vec::with_capacity(fine.cells);
    let mut plus_v = Vec::with_capacity(fine.cells);
    let mut minus_v = Vec::with_capacity(fine.cells);
    let mut dens = Vec::with_capacity(fine.cells);
    for w in nodes.windows(2) {
        let m = gl3(|t| weight(t), w[0], w[1]);
        let avg = |g: &dyn Fn(f64) -> f64| datum.piecewise(|t| weight(t) * g(datum.eval(t)), w[0], w[1]) / m;
        abs_v.push(avg(&|v: f64| v.abs()));
        plus_v.push(avg(&|v: f64| v.max(0.0)));
        minus_v.push(avg(&|v: f64| (-v).max(0.0)));
        dens.push(m / h);
    }
    let mk = |v: Vec<f64>| SampledFn::new(nodes.clone(), v, dens.clone());
    let f_star = decreasing_rearrangement(&mk(abs_v)?);
    let norm_q = f_star.lq_norm(q);
    if !(q >= 1.0) {
        return Err(Error::domain("q in [1, inf]", format!("q = {q}")));
    }
    Ok(RearrangedDatum {
        f_star,
        f_plus_star: decreasing_rearrangement(&mk(plus_v)?),
        f_minus_star: decreasing_rearrangement(&mk(minus_v)?),
        q,
        norm_q,
    })
}
