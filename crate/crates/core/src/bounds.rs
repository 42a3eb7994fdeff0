//! Pointwise a-priori bounds for the rearrangements of `u` and `|∇u|`,
//! and the exponents of the stability estimate.
//!
//! All curves integrate against `d(-D nu_p^{1/(1-p)})`, the Stieltjes
//! weight carried by [`IsocapFn`]. The inner cumulative `∫_0^r f_±*` is exact
//! on the rearrangement's breakpoints.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{Exactness, IsocapFn};
use crate::error::{Error, Result};
use crate::numerics::stieltjes_integrate;
use crate::rearrange::{RearrangedDatum, Rearrangement, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    /// `u_±*(s) <= ∫_s^{M/2} (∫_0^r f_±*)^{1/(p-1)} d(-D phi)(r)`.
    #[serde(rename = "SOLUTION_BOUND")]
    Solution,
    /// `|∇u_±|*(s) <= ((2/s) ∫_{s/2}^{M/2} (∫_0^r f_±*)^{p'} d(-D phi)(r))^{1/p}`.
    #[serde(rename = "GRADIENT_BOUND")]
    Gradient,
    /// `|∇u_±|*(s) <= 2^{1/p} ||f_±||_1^{1/(p-1)} (phi(s/2)/s)^{1/p}`.
    #[serde(rename = "MARCINKIEWICZ_BOUND")]
    Marcinkiewicz,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Solution => "SOLUTION_BOUND",
            Provenance::Gradient => "GRADIENT_BOUND",
            Provenance::Marcinkiewicz => "MARCINKIEWICZ_BOUND",
        }
    }

    /// Whether the bound is on `|∇u_±|*` rather than `u_±*`.
    pub fn is_gradient(self) -> bool {
        !matches!(self, Provenance::Solution)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlag {
    Ok,
    /// `s/2 >= M/2`: the integral is over an empty range and the bound is 0.
    EmptyRange,
    /// The Stieltjes integral diverged or could not be resolved; the bound is `+inf`.
    Divergent,
}

impl BoundFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundFlag::Ok => "ok",
            BoundFlag::EmptyRange => "empty_range",
            BoundFlag::Divergent => "divergent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub flags: Vec<BoundFlag>,
    pub provenance: Provenance,
    pub sign: Sign,
    pub p: f64,
    /// True when `nu_p` is exact, so the curve is a bound with no hidden constant.
    pub constants_known: bool,
}

impl BoundCurve {
    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }
}

fn check_grid(s_grid: &[f64], upper: f64, what: &str) -> Result<()> {
    if s_grid.iter().any(|&s| !(s > 0.0 && s < upper)) {
        return Err(Error::InvalidInput(format!("{what} grid must lie in (0, {upper})")));
    }
    if s_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

/// `∫_x^{M/2} g(F(r)) d(-D phi)(r)` for every `x` in the increasing list `xs`,
/// by summing integrals between consecutive evaluation points and breakpoints.
fn tail_integrals<G>(nu: &IsocapFn, part: &Rearrangement, xs: &[f64], g: G) -> Result<Vec<(f64, BoundFlag)>>
where
    G: Fn(f64) -> f64 + Sync,
{
    let half = nu.half_measure();
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let mut cuts: Vec<f64> = xs.iter().copied().filter(|&x| x < half).collect();
    let first = cuts.first().copied().unwrap_or(half);
    cuts.extend(part.breaks().iter().copied().filter(|&b| b > first && b < half));
    cuts.push(half);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces: Vec<Result<f64>> = cuts
        .par_windows(2)
        .map(|w| stieltjes_integrate(|r| g(part.integral_to(r)), &nu.weight, w[0], w[1]))
        .collect();
    let mut suffix = vec![(0.0, BoundFlag::Ok); cuts.len()];
    for i in (0..cuts.len() - 1).rev() {
        let (acc, flag) = suffix[i + 1];
        suffix[i] = match &pieces[i] {
            Ok(v) if v.is_finite() && flag == BoundFlag::Ok => (acc + v, BoundFlag::Ok),
            Ok(_) | Err(Error::QuadratureBudget { .. }) | Err(Error::NonFiniteIntegrand { .. }) => {
                (f64::INFINITY, BoundFlag::Divergent)
            }
            Err(e) => return Err(e.clone()),
        };
    }
    Ok(xs
        .iter()
        .map(|&x| {
            if x >= half {
                (0.0, BoundFlag::EmptyRange)
            } else {
                let i = cuts.partition_point(|&c| c < x);
                suffix[i]
            }
        })
        .collect())
}

fn constants_known(nu: &IsocapFn) -> bool {
    nu.exactness == Exactness::Exact
}

/// The bound on `u_±*` over `s_grid ⊂ (0, M/2)`.
pub fn solution_rearrangement_bound(
    nu: &IsocapFn,
    f: &RearrangedDatum,
    sign: Sign,
    s_grid: &[f64],
) -> Result<BoundCurve> {
    check_grid(s_grid, nu.half_measure(), "solution bound")?;
    let e = 1.0 / (nu.p - 1.0);
    let part = f.part(sign);
    let tails = tail_integrals(nu, part, s_grid, |big_f| big_f.max(0.0).powf(e))?;
    Ok(BoundCurve {
        s_grid: s_grid.to_vec(),
        values: tails.iter().map(|t| t.0).collect(),
        flags: tails.iter().map(|t| t.1).collect(),
        provenance: Provenance::Solution,
        sign,
        p: nu.p,
        constants_known: constants_known(nu),
    })
}

/// The bound on `|∇u_±|*` over `s_grid ⊂ (0, M)`.
pub fn gradient_rearrangement_bound(
    nu: &IsocapFn,
    f: &RearrangedDatum,
    sign: Sign,
    s_grid: &[f64],
) -> Result<BoundCurve> {
    check_grid(s_grid, nu.measure, "gradient bound")?;
    let p = nu.p;
    let pp = p / (p - 1.0);
    let part = f.part(sign);
    let halves: Vec<f64> = s_grid.iter().map(|s| 0.5 * s).collect();
    let tails = tail_integrals(nu, part, &halves, |big_f| big_f.max(0.0).powf(pp))?;
    let values = s_grid
        .iter()
        .zip(&tails)
        .map(|(&s, &(i, _))| (2.0 / s * i).powf(1.0 / p))
        .collect();
    Ok(BoundCurve {
        s_grid: s_grid.to_vec(),
        values,
        flags: tails.iter().map(|t| t.1).collect(),
        provenance: Provenance::Gradient,
        sign,
        p,
        constants_known: constants_known(nu),
    })
}

/// `omega_p(s) = (s nu_p(s/2)^{1/(p-1)})^{1/p}`, the Marcinkiewicz weight.
pub fn omega_p(nu: &IsocapFn, s: f64) -> f64 {
    (s / nu.phi(0.5 * s)).powf(1.0 / nu.p)
}

/// Pointwise weak-type bound `2^{1/p} ||f_±||_1^{1/(p-1)} (phi(s/2)/s)^{1/p}`
/// on `|∇u_±|*(s)`, `s ∈ (0, M)`.
pub fn marcinkiewicz_gradient_bound(nu: &IsocapFn, f: &RearrangedDatum, sign: Sign, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < nu.measure) {
        return Err(Error::InvalidInput(format!("s = {s} must lie in (0, {})", nu.measure)));
    }
    let p = nu.p;
    let l1 = f.part(sign).total_integral();
    if l1 == 0.0 {
        return Ok(0.0);
    }
    Ok(2f64.powf(1.0 / p) * l1.powf(1.0 / (p - 1.0)) / omega_p(nu, s))
}

/// [`marcinkiewicz_gradient_bound`] on a grid, as a curve.
pub fn marcinkiewicz_bound_curve(nu: &IsocapFn, f: &RearrangedDatum, sign: Sign, s_grid: &[f64]) -> Result<BoundCurve> {
    check_grid(s_grid, nu.measure, "Marcinkiewicz bound")?;
    let values = s_grid
        .iter()
        .map(|&s| marcinkiewicz_gradient_bound(nu, f, sign, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        s_grid: s_grid.to_vec(),
        flags: vec![BoundFlag::Ok; values.len()],
        values,
        provenance: Provenance::Marcinkiewicz,
        sign,
        p: nu.p,
        constants_known: constants_known(nu),
    })
}

/// `r = max{p, 2}` and the two exponents of the stability estimate
/// `||∇u - ∇v|| <= K ||f - g||^{exp_diff} (||f|| + ||g||)^{exp_sum}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityExponents {
    pub r: f64,
    pub exp_diff: f64,
    pub exp_sum: f64,
}

pub fn stability_exponents(p: f64) -> Result<StabilityExponents> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain("p > 1", format!("p = {p}")));
    }
    let r = p.max(2.0);
    Ok(StabilityExponents {
        r,
        exp_diff: 1.0 / r,
        exp_sum: 1.0 / (p - 1.0) - 1.0 / r,
    })
}

/// `∫_0^{mass} f_±*`, the majorant of the flux of `|∇u|^{p-1}` through a level set.
pub fn flux_majorant(f: &RearrangedDatum, sign: Sign, mass: f64) -> Result<f64> {
    let total = f.mass();
    if !(mass >= 0.0 && mass <= total * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("mass {mass} must lie in [0, {total}]")));
    }
    Ok(f.part(sign).integral_to(mass.min(total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{nu_p, DomainSpec, NuModel};

    fn interval(p: f64) -> IsocapFn {
        nu_p(&DomainSpec::interval(1.0), p).unwrap()
    }

    fn ones() -> RearrangedDatum {
        let one = Rearrangement::step(vec![0.0, 1.0], vec![1.0]).unwrap();
        RearrangedDatum::from_majorant(one, 2.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn interval_solution_bound_closed_forms() {
        let s: Vec<f64> = (1..50).map(|k| k as f64 / 100.0).collect();
        let c = solution_rearrangement_bound(&interval(2.0), &ones(), Sign::Plus, &s).unwrap();
        for (x, b) in s.iter().zip(&c.values) {
            assert!((b - (0.125 - x * x / 2.0)).abs() < 1e-12);
        }
        assert!(c.constants_known);
        let c = solution_rearrangement_bound(&interval(3.0), &ones(), Sign::Minus, &s).unwrap();
        for (x, b) in s.iter().zip(&c.values) {
            let exact = (0.5f64.powf(1.5) - x.powf(1.5)) * 2.0 / 3.0;
            assert!((b - exact).abs() < 1e-10);
        }
        assert!(c.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn interval_gradient_bound_closed_form() {
        let s: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
        let c = gradient_rearrangement_bound(&interval(2.0), &ones(), Sign::Plus, &s).unwrap();
        for ((x, b), flag) in s.iter().zip(&c.values).zip(&c.flags) {
            // (2/s) ∫_{s/2}^{1/2} r^2 dr = (2/s)(1/24 - s^3/24)
            let exact = ((2.0 / x) * (1.0 - x.powi(3)) / 24.0).sqrt();
            assert!(rel(*b, exact) < 1e-10, "s = {x}");
            assert_eq!(*flag, BoundFlag::Ok);
        }
        let c = gradient_rearrangement_bound(&interval(2.0), &ones(), Sign::Plus, &[0.5, 0.99]).unwrap();
        assert!(c.values[1] < 0.1);
    }

    #[test]
    fn power_nu_gradient_bound() {
        // nu = s^theta, phi = s^{-theta}, weight theta r^{-theta-1}; F = r.
        let theta = 0.5;
        let nu = nu_p(
            &DomainSpec::custom(
                NuModel::Power {
                    coef: 1.0,
                    exponent: theta,
                },
                1.0,
            ),
            2.0,
        )
        .unwrap();
        let s = [0.01, 0.1, 0.4, 0.9];
        let c = gradient_rearrangement_bound(&nu, &ones(), Sign::Plus, &s).unwrap();
        for (x, b) in s.iter().zip(&c.values) {
            let lo: f64 = x / 2.0;
            let i = theta * (0.5f64.powf(2.0 - theta) - lo.powf(2.0 - theta)) / (2.0 - theta);
            assert!(rel(*b, (2.0 / x * i).sqrt()) < 1e-9);
        }
    }

    #[test]
    fn zero_datum_gives_zero() {
        let z = RearrangedDatum::from_parts(Rearrangement::zero(1.0), Rearrangement::zero(1.0), 2.0).unwrap();
        let s = [0.1, 0.3];
        let nu = interval(2.0);
        assert!(solution_rearrangement_bound(&nu, &z, Sign::Plus, &s).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(gradient_rearrangement_bound(&nu, &z, Sign::Plus, &s).unwrap().values.iter().all(|&v| v == 0.0));
        assert_eq!(marcinkiewicz_gradient_bound(&nu, &z, Sign::Plus, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn marcinkiewicz_examples() {
        let one = Rearrangement::step(vec![0.0, 0.5, 1.0], vec![2.0, 0.0]).unwrap();
        let f = RearrangedDatum::from_parts(one.clone(), one, 1.0).unwrap();
        let v = marcinkiewicz_gradient_bound(&interval(2.0), &f, Sign::Plus, 0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        let nu = nu_p(
            &DomainSpec::custom(
                NuModel::Power {
                    coef: 1.0,
                    exponent: 1.0,
                },
                1.0,
            ),
            2.0,
        )
        .unwrap();
        for s in [0.1, 0.7] {
            assert!(rel(omega_p(&nu, s), s / 2f64.sqrt()) < 1e-14);
        }
    }

    #[test]
    fn stability_exponent_examples() {
        let e = stability_exponents(2.0).unwrap();
        assert_eq!((e.r, e.exp_diff, e.exp_sum), (2.0, 0.5, 0.5));
        let e = stability_exponents(3.0).unwrap();
        assert_eq!(e.r, 3.0);
        assert!((e.exp_diff - 1.0 / 3.0).abs() < 1e-15 && (e.exp_sum - 1.0 / 6.0).abs() < 1e-15);
        let e = stability_exponents(1.5).unwrap();
        assert_eq!((e.r, e.exp_diff, e.exp_sum), (2.0, 0.5, 1.5));
        assert!(stability_exponents(1.0).is_err());
    }

    #[test]
    fn flux_majorant_examples() {
        assert!((flux_majorant(&ones(), Sign::Plus, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(flux_majorant(&ones(), Sign::Plus, 0.0).unwrap(), 0.0);
        let two = Rearrangement::step(vec![0.0, 0.25, 1.0], vec![2.0, 0.0]).unwrap();
        let f = RearrangedDatum::from_parts(two.clone(), two, 1.0).unwrap();
        assert!((flux_majorant(&f, Sign::Minus, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_outside_range_is_rejected() {
        assert!(solution_rearrangement_bound(&interval(2.0), &ones(), Sign::Plus, &[0.6]).is_err());
        assert!(gradient_rearrangement_bound(&interval(2.0), &ones(), Sign::Plus, &[1.0]).is_err());
    }
}
