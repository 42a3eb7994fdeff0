//! Checks of the a-priori inequalities against the oracle solution.

use serde::Serialize;

use super::levels::band_integrals;
use super::{
    gl3, level_flux, psi_function, solve_weighted_neumann, weighted_gradient_rearrangement, Datum, NeumannSolution,
    SolverGrid,
};
use crate::bounds::{flux_majorant, stability_exponents, BoundCurve, BoundFlag};
use crate::domains::IsocapFn;
use crate::error::{Error, Result};
use crate::numerics::RealFn;
use crate::rearrange::{PiecewiseLinear, RearrangedDatum, Sign};

/// Relative slack of strict pointwise checks.
pub const STRICT_SLACK: f64 = 1e-3;
/// Absolute floor of strict checks, relative to the largest finite right-hand side.
pub const STRICT_FLOOR: f64 = 1e-9;
pub const COAREA_TOL: f64 = 1e-6;
pub const HOMOGENEITY_TOL: f64 = 1e-8;
/// Allowed relative drift of a fitted constant.
pub const FITTED_DRIFT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Strict,
    FittedConstant,
}

/// Outcome of a pointwise check `lhs(x) <= rhs(x)` over sample points `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    pub skipped: usize,
    /// Sample point with the largest `lhs / rhs`.
    pub worst_at: Option<f64>,
    pub worst_lhs: f64,
    pub worst_rhs: f64,
    pub worst_ratio: f64,
    pub fitted_constant: Option<f64>,
    pub notes: Vec<String>,
}

struct Tally {
    report: CheckReport,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally {
            report: CheckReport {
                name: name.into(),
                passed: true,
                checked: 0,
                violations: 0,
                skipped: 0,
                worst_at: None,
                worst_lhs: 0.0,
                worst_rhs: 0.0,
                worst_ratio: 0.0,
                fitted_constant: None,
                notes: Vec::new(),
            },
        }
    }

    fn ratio(lhs: f64, rhs: f64) -> f64 {
        if lhs <= 0.0 {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            f64::INFINITY
        }
    }

    fn record(&mut self, x: f64, lhs: f64, rhs: f64, ok: bool) {
        let r = &mut self.report;
        r.checked += 1;
        if !ok {
            r.violations += 1;
            r.passed = false;
        }
        let ratio = Self::ratio(lhs, rhs);
        if r.worst_at.is_none() || ratio > r.worst_ratio {
            r.worst_at = Some(x);
            r.worst_lhs = lhs;
            r.worst_rhs = rhs;
            r.worst_ratio = ratio;
        }
    }

    fn strict(&mut self, x: f64, lhs: f64, rhs: f64, floor: f64) {
        let ok = !lhs.is_nan() && (rhs == f64::INFINITY || lhs <= rhs * (1.0 + STRICT_SLACK) + floor);
        self.record(x, lhs, rhs, ok);
    }

    fn skip(&mut self) {
        self.report.skipped += 1;
    }

    fn note(&mut self, s: impl Into<String>) {
        self.report.notes.push(s.into());
    }

    fn finish(self) -> CheckReport {
        self.report
    }
}

fn floor_of(rhs: impl Iterator<Item = f64>) -> f64 {
    STRICT_FLOOR * rhs.filter(|v| v.is_finite()).fold(0.0, f64::max)
}

fn signed_linear(sol: &NeumannSolution, sign: Sign) -> PiecewiseLinear {
    let pl = sol.piecewise_linear();
    match sign {
        Sign::Plus => pl,
        Sign::Minus => PiecewiseLinear::new(
            pl.nodes().to_vec(),
            pl.values().iter().map(|v| -v).collect(),
            pl.weights().to_vec(),
        )
        .expect("negated solution is valid"),
    }
}

fn flat_levels(sol: &NeumannSolution, sign: Sign) -> Vec<f64> {
    let s = if sign == Sign::Plus { 1.0 } else { -1.0 };
    (0..sol.cells())
        .filter(|&j| sol.u[j] == sol.u[j + 1])
        .map(|j| s * sol.u[j])
        .collect()
}

fn is_jump_level(flat: &[f64], t: f64, scale: f64) -> bool {
    flat.iter().any(|&x| (x - t).abs() <= 1e-12 * scale)
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

/// Left-hand side of a bound curve: `u_±*` or `|∇u_±|*` at the curve's grid.
fn curve_lhs(sol: &NeumannSolution, curve: &BoundCurve) -> Vec<f64> {
    let r = if curve.provenance.is_gradient() {
        weighted_gradient_rearrangement(sol, curve.sign.into())
    } else {
        sol.rearrangement(curve.sign)
    };
    curve.s_grid.iter().map(|&s| r.eval(s)).collect()
}

fn fitted(lhs: &[f64], curve: &BoundCurve) -> f64 {
    lhs.iter()
        .zip(&curve.values)
        .zip(&curve.flags)
        .filter(|(_, f)| **f == BoundFlag::Ok)
        .map(|((&l, &b), _)| Tally::ratio(l, b))
        .fold(0.0, f64::max)
}

/// `u_±*(s) <= B(s)` or `|∇u_±|*(s) <= B(s)` over the curve's grid.
///
/// Strict mode needs a curve with known constants. Fitted mode reports
/// `K = sup LHS/B` and passes when `K` moves by at most 10% on the grid
/// refined by two.
pub fn verify_bound(sol: &NeumannSolution, curve: &BoundCurve, mode: BoundMode) -> Result<CheckReport> {
    if (curve.p - sol.p).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "bound curve has p = {} but the solution has p = {}",
            curve.p, sol.p
        )));
    }
    let what = if curve.provenance.is_gradient() { "|grad u" } else { "u" };
    let name = format!("{} ({}{}{}*)", curve.provenance, what, sign_name(curve.sign), if curve.provenance.is_gradient() { "|" } else { "" });
    let mut t = Tally::new(name);
    let lhs = curve_lhs(sol, curve);
    match mode {
        BoundMode::Strict => {
            if !curve.constants_known {
                return Err(Error::InvalidInput(
                    "strict verification needs an exact nu_p (constants_known = true)".into(),
                ));
            }
            let floor = floor_of(curve.values.iter().copied());
            for (i, &s) in curve.s_grid.iter().enumerate() {
                match curve.flags[i] {
                    BoundFlag::Divergent => t.skip(),
                    _ => t.strict(s, lhs[i], curve.values[i], floor),
                }
            }
            if t.report.skipped > 0 {
                t.note(format!("{} points with divergent bound", t.report.skipped));
            }
        }
        BoundMode::FittedConstant => {
            let k = fitted(&lhs, curve);
            let fine = sol.refine()?;
            let k2 = fitted(&curve_lhs(&fine, curve), curve);
            for (i, &s) in curve.s_grid.iter().enumerate() {
                if curve.flags[i] == BoundFlag::Ok {
                    t.record(s, lhs[i], curve.values[i], true);
                } else {
                    t.skip();
                }
            }
            let drift = if k == 0.0 && k2 == 0.0 { 0.0 } else { (k2 / k - 1.0).abs() };
            t.report.fitted_constant = Some(k);
            t.note(format!("K = {k:.6e}, K on refined grid = {k2:.6e}, drift = {drift:.3e}"));
            if !(drift <= FITTED_DRIFT) {
                t.report.passed = false;
                t.report.violations += 1;
            }
        }
    }
    Ok(t.finish())
}

/// `∫_{u_± = t} |∇u|^{p-1} <= ∫_0^{μ_{u_±}(t)} f_±*` at the levels of `t_grid`;
/// levels on which `u` is constant over a cell are skipped.
pub fn verify_flux_inequality(
    sol: &NeumannSolution,
    f: &RearrangedDatum,
    sign: Sign,
    t_grid: &[f64],
) -> Result<CheckReport> {
    let mut t = Tally::new(format!("flux inequality (u{})", sign_name(sign)));
    let pl = signed_linear(sol, sign);
    let flat = flat_levels(sol, sign);
    let scale = t_grid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let mut rows = Vec::with_capacity(t_grid.len());
    for &tau in t_grid {
        if !(tau > 0.0) || is_jump_level(&flat, tau, scale) {
            rows.push(None);
            continue;
        }
        let mu = pl.upper_level_measure(tau).min(f.mass());
        rows.push(Some((level_flux(sol, sign, tau), flux_majorant(f, sign, mu)?)));
    }
    let floor = floor_of(rows.iter().flatten().map(|r| r.1));
    for (&tau, row) in t_grid.iter().zip(rows) {
        match row {
            Some((lhs, rhs)) => t.strict(tau, lhs, rhs, floor),
            None => t.skip(),
        }
    }
    Ok(t.finish())
}

/// `nu_p(|{u_± >= t}|) <= psi_{u_±}(t)^{1-p}` at the levels of `t_grid`.
/// Levels whose upper set is not inside `(0, M/2)` are skipped.
pub fn verify_isocap_levelset(
    sol: &NeumannSolution,
    nu: &IsocapFn,
    sign: Sign,
    t_grid: &[f64],
) -> Result<CheckReport> {
    if (nu.p - sol.p).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("nu_p has p = {} but the solution has p = {}", nu.p, sol.p)));
    }
    let mut t = Tally::new(format!("isocapacitary level sets (u{})", sign_name(sign)));
    let pl = signed_linear(sol, sign);
    let flat = flat_levels(sol, sign);
    let scale = t_grid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let usable: Vec<f64> = t_grid
        .iter()
        .copied()
        .filter(|&tau| tau > 0.0 && !is_jump_level(&flat, tau, scale))
        .collect();
    let psi = psi_function(sol, sign, &usable)?;
    let mut rows = Vec::new();
    for (&tau, &ps) in usable.iter().zip(&psi) {
        let mu = pl.upper_level_measure(tau);
        if !(mu > 0.0 && mu < nu.half_measure()) {
            rows.push(None);
            continue;
        }
        rows.push(Some((tau, nu.evaluate(mu), ps.powf(1.0 - sol.p))));
    }
    let floor = floor_of(rows.iter().flatten().map(|r| r.2));
    t.report.skipped = t_grid.len() - usable.len();
    for row in rows {
        match row {
            Some((tau, lhs, rhs)) => t.strict(tau, lhs, rhs, floor),
            None => t.skip(),
        }
    }
    Ok(t.finish())
}

/// The coarea identity `∫_{0 < u_± <= t} |u'|^p A = ∫_0^t (∫_{u_± = tau} |u'|^{p-1} A) dtau`
/// at the levels of `t_grid`, to relative accuracy [`COAREA_TOL`] of the
/// value at `max u_±`.
pub fn verify_coarea(sol: &NeumannSolution, sign: Sign, t_grid: &[f64]) -> Result<CheckReport> {
    let mut t = Tally::new(format!("coarea identity (u{})", sign_name(sign)));
    let s = if sign == Sign::Plus { 1.0 } else { -1.0 };
    let v: Vec<f64> = sol.u.iter().map(|x| s * x).collect();
    let top = v.iter().fold(0.0f64, |m, &x| m.max(x));
    if top <= 0.0 {
        t.note("u vanishes on this side; both sides are 0");
        t.record(0.0, 0.0, 0.0, true);
        return Ok(t.finish());
    }
    let mut levels: Vec<f64> = t_grid.iter().copied().filter(|&x| x > 0.0).map(|x| x.min(top)).collect();
    levels.push(top);
    let rhs = band_integrals(sol, sign, &levels, |phi| phi);
    let p = sol.p;
    let w = sol.weight().clone();
    let energy = |a: f64, b: f64| gl3(|x| sol.gradient_at(x).abs().powf(p) * w(x), a, b);
    let lhs: Vec<f64> = levels
        .iter()
        .map(|&level| {
            (0..sol.cells())
                .map(|j| {
                    let (t0, t1) = (sol.nodes[j], sol.nodes[j + 1]);
                    let (v0, v1) = (v[j], v[j + 1]);
                    if v0 == v1 {
                        return if v0 > 0.0 && v0 <= level { energy(t0, t1) } else { 0.0 };
                    }
                    // {0 < v <= level} within the cell, v linear.
                    let at = |y: f64| t0 + (t1 - t0) * (y - v0) / (v1 - v0);
                    let (lo, hi) = (v0.min(v1).max(0.0), v0.max(v1).min(level));
                    if lo >= hi {
                        return 0.0;
                    }
                    let (xa, xb) = (at(lo), at(hi));
                    energy(xa.min(xb), xa.max(xb))
                })
                .sum()
        })
        .collect();
    let scale = *rhs.last().unwrap();
    for ((&level, &l), &r) in levels.iter().zip(&lhs).zip(&rhs) {
        let ok = (l - r).abs() <= COAREA_TOL * scale;
        t.record(level, l, r, ok);
    }
    Ok(t.finish())
}

/// `||h||_{L^q(A)}` of a datum on `grid`, with `q = inf` the maximum at the
/// quadrature nodes.
fn datum_norm(weight: &RealFn, datum: &Datum, grid: SolverGrid, q: f64) -> f64 {
    let nodes = grid.nodes();
    if q.is_infinite() {
        let m = std::cell::Cell::new(0.0f64);
        for c in nodes.windows(2) {
            datum.piecewise(
                |t| {
                    m.set(m.get().max(datum.eval(t).abs()));
                    0.0
                },
                c[0],
                c[1],
            );
        }
        return m.get();
    }
    let total: f64 = nodes
        .windows(2)
        .map(|c| datum.piecewise(|t| weight(t) * datum.eval(t).abs().powf(q), c[0], c[1]))
        .sum();
    total.powf(1.0 / q)
}

/// One evaluation of both sides of the stability estimate
/// `||∇u - ∇v||_{L^{p-1}(A)} <= K ||f - g||_q^{1/r} (||f||_q + ||g||_q)^{1/(p-1) - 1/r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilitySample {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the smallest admissible `K`; 0 when `lhs = 0`.
    pub ratio: f64,
}

pub fn stability_sample(
    weight: &RealFn,
    p: f64,
    f: &Datum,
    g: &Datum,
    grid: SolverGrid,
    q: f64,
) -> Result<StabilitySample> {
    let ex = stability_exponents(p)?;
    let u = solve_weighted_neumann(weight, p, f, grid)?;
    let v = solve_weighted_neumann(weight, p, g, grid)?;
    let sum: f64 = u
        .cell_gradient
        .iter()
        .zip(&v.cell_gradient)
        .zip(&u.cell_mass)
        .map(|((a, b), m)| (a - b).abs().powf(p - 1.0) * m)
        .sum();
    let lhs = sum.powf(1.0 / (p - 1.0));
    let diff = f.perturbed(g, -1.0);
    let nd = datum_norm(weight, &diff, grid, q);
    let ns = datum_norm(weight, f, grid, q) + datum_norm(weight, g, grid, q);
    let rhs = nd.powf(ex.exp_diff) * ns.powf(ex.exp_sum);
    Ok(StabilitySample {
        lhs,
        rhs,
        ratio: Tally::ratio(lhs, rhs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub p: f64,
    pub q: f64,
    pub base: StabilitySample,
    /// `(t, relative error of lhs scaling, relative error of rhs scaling)`.
    pub homogeneity: Vec<(f64, f64, f64)>,
    pub homogeneity_passed: bool,
    pub k_refined: f64,
    pub refinement_drift: f64,
    pub refinement_passed: bool,
    pub passed: bool,
}

fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        (actual / expected - 1.0).abs()
    }
}

/// Scaling of both sides under `(f, g) -> (t f, t g)`, which must be exactly
/// `t^{1/(p-1)}`, and stability of the fitted `K` under refinement by two.
pub fn verify_stability(
    weight: &RealFn,
    p: f64,
    f: &Datum,
    g: &Datum,
    grid: SolverGrid,
    q: f64,
) -> Result<StabilityReport> {
    let base = stability_sample(weight, p, f, g, grid, q)?;
    let mut homogeneity = Vec::new();
    for t in [0.5, 3.0] {
        let s = stability_sample(weight, p, &f.scaled(t), &g.scaled(t), grid, q)?;
        let k = t.powf(1.0 / (p - 1.0));
        homogeneity.push((t, rel_err(s.lhs, k * base.lhs), rel_err(s.rhs, k * base.rhs)));
    }
    let homogeneity_passed = homogeneity
        .iter()
        .all(|&(_, a, b)| a <= HOMOGENEITY_TOL && b <= HOMOGENEITY_TOL);
    let fine = stability_sample(weight, p, f, g, grid.refined(), q)?;
    let refinement_drift = if base.ratio == 0.0 && fine.ratio == 0.0 {
        0.0
    } else {
        rel_err(fine.ratio, base.ratio)
    };
    let refinement_passed = refinement_drift <= FITTED_DRIFT;
    Ok(StabilityReport {
        p,
        q,
        base,
        homogeneity,
        homogeneity_passed,
        k_refined: fine.ratio,
        refinement_drift,
        refinement_passed,
        passed: homogeneity_passed && refinement_passed,
    })
}

/// Fitted `K` along `g = f + eps h` with `eps` halving from `eps0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityFamily {
    pub p: f64,
    pub eps: Vec<f64>,
    pub k: Vec<f64>,
    /// `max_eps K(eps) / K(eps0) - 1`.
    pub max_growth: f64,
    /// `K` never exceeds `K(eps0)` by more than 10%.
    pub passed: bool,
}

pub fn verify_stability_family(
    weight: &RealFn,
    p: f64,
    f: &Datum,
    h: &Datum,
    eps0: f64,
    halvings: usize,
    grid: SolverGrid,
    q: f64,
) -> Result<StabilityFamily> {
    let eps: Vec<f64> = (0..=halvings).map(|k| eps0 * 0.5f64.powi(k as i32)).collect();
    let k = eps
        .iter()
        .map(|&e| stability_sample(weight, p, f, &f.perturbed(h, e), grid, q).map(|s| s.ratio))
        .collect::<Result<Vec<_>>>()?;
    let k0 = k[0];
    let max_growth = if k0 > 0.0 {
        k.iter().map(|&x| x / k0 - 1.0).fold(f64::NEG_INFINITY, f64::max)
    } else if k.iter().all(|&x| x == 0.0) {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(StabilityFamily {
        p,
        eps,
        k,
        max_growth,
        passed: max_growth <= FITTED_DRIFT,
    })
}

/// Grid convergence of the cell-wise constant `u'` against a closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub cells: Vec<usize>,
    /// `max_j sup_{cell j} |u'_j - u'_exact|`, taken at the cell ends.
    pub errors: Vec<f64>,
    /// `errors[k] / errors[k + 1]`.
    pub ratios: Vec<f64>,
}

pub fn convergence_study<E: Fn(f64) -> f64>(
    weight: &RealFn,
    p: f64,
    datum: &Datum,
    exact_gradient: E,
    grid: SolverGrid,
    halvings: usize,
) -> Result<ConvergenceStudy> {
    let mut cells = Vec::new();
    let mut errors = Vec::new();
    let mut g = grid;
    for _ in 0..=halvings {
        let sol = solve_weighted_neumann(weight, p, datum, g)?;
        let err = (0..g.cells)
            .map(|j| {
                let c = sol.cell_gradient[j];
                (c - exact_gradient(sol.nodes[j]))
                    .abs()
                    .max((c - exact_gradient(sol.nodes[j + 1])).abs())
            })
            .fold(0.0, f64::max);
        cells.push(g.cells);
        errors.push(err);
        g = g.refined();
    }
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceStudy { cells, errors, ratios })
}
