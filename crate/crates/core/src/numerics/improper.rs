//! Convergence classification of improper integrals and suprema with one
//! singular endpoint.
//!
//! The integrand is sampled on the geometric sequence `d_k = (b - a) 2^{-k}`,
//! `k = 10..=40`, of distances to the singular end and fitted by least squares
//! to `log f = c + e log d + beta log log(1/d)`. The power `e` is compared
//! against the integrability threshold `-1` (or `0` for a supremum). Inside
//! the exponent margin the logarithmic exponent decides when `e` sits on the
//! threshold; anything else is reported as indeterminate.

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate_adaptive, integrate_to_infinity, IMPROPER_REL_TOL};
use crate::error::{Error, Result};

/// Exponent margin around a convergence threshold.
pub const EXPONENT_MARGIN: f64 = 0.02;
/// A fitted power closer than this to the threshold is treated as sitting on it.
pub const ON_THRESHOLD_TOL: f64 = 1e-3;
/// Positive samples needed to fit ahead of an underflowed zero tail.
const MIN_FIT_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularEnd {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converges,
    Diverges,
    Indeterminate,
}

/// Fitted local behaviour `f(d) ~ C d^exponent (log 1/d)^log_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticClass {
    pub exponent: f64,
    pub log_exponent: f64,
}

impl std::fmt::Display for AsymptoticClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.log_exponent.abs() < 1e-6 {
            write!(f, "power {:.4}", self.exponent)
        } else {
            write!(f, "power {:.4} log^{:.4}", self.exponent, self.log_exponent)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralVerdict {
    pub status: Convergence,
    /// Finite when the integral converges, `+inf` when it diverges, NaN otherwise.
    pub value: f64,
    pub divergence_rate: Option<AsymptoticClass>,
    pub tolerance_used: f64,
}

impl IntegralVerdict {
    pub fn converges(&self) -> bool {
        self.status == Convergence::Converges
    }
}

/// Verdict for `sup` of a function approaching a singular endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupVerdict {
    pub status: Convergence,
    pub value: f64,
    pub rate: Option<AsymptoticClass>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub k_min: u32,
    pub k_max: u32,
    pub margin: f64,
    pub rel_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            k_min: 10,
            k_max: 40,
            margin: EXPONENT_MARGIN,
            rel_tol: IMPROPER_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Fit {
    log_coef: f64,
    class: AsymptoticClass,
    // ln(C / d) = log_shift - ln d
    log_shift: f64,
}

enum Samples {
    Positive(Vec<(f64, f64)>),
    Vanishing,
    Infinite,
}

fn point(a: f64, b: f64, end: SingularEnd, d: f64) -> f64 {
    match end {
        SingularEnd::Left => a + d,
        SingularEnd::Right => b - d,
    }
}

fn collect<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, end: SingularEnd, opts: &ClassifyOptions) -> Result<Samples> {
    let width = b - a;
    let mut out = Vec::new();
    let (mut pos, mut zero, mut neg, mut inf) = (0, 0, 0, 0);
    // Zeros seen after the last positive sample; a zero tail is underflow.
    let mut trailing_zeros = 0;
    for k in opts.k_min..=opts.k_max {
        let d = width * 2f64.powi(-(k as i32));
        let x = point(a, b, end, d);
        let v = f(x);
        if v.is_nan() {
            return Err(Error::NonFiniteIntegrand { x, value: v });
        }
        if v == f64::INFINITY {
            inf += 1;
        } else if v > 0.0 {
            pos += 1;
            trailing_zeros = 0;
            out.push((d, v));
        } else if v == 0.0 {
            zero += 1;
            trailing_zeros += 1;
        } else {
            neg += 1;
        }
    }
    if neg > 0 && (pos > 0 || inf > 0) {
        return Err(Error::Unsupported(
            "integrand changes sign near the singular endpoint".into(),
        ));
    }
    if neg > 0 {
        return Err(Error::Unsupported(
            "integrand is negative near the singular endpoint".into(),
        ));
    }
    if inf > 0 {
        return Ok(Samples::Infinite);
    }
    if zero > trailing_zeros {
        return Err(Error::Unsupported(
            "integrand vanishes intermittently near the singular endpoint".into(),
        ));
    }
    if pos == 0 || (zero > 0 && pos < MIN_FIT_SAMPLES) {
        return Ok(Samples::Vanishing);
    }
    Ok(Samples::Positive(out))
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = r[row];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}

fn fit(samples: &[(f64, f64)], width: f64, opts: &ClassifyOptions) -> Fit {
    let d_max = width * 2f64.powi(-(opts.k_min as i32));
    // Keep log(C/d) >= 1 on the sample range.
    let log_shift = if d_max < (-1.0f64).exp() { 0.0 } else { d_max.ln() + 1.0 };
    // Centre the regressors for conditioning.
    let rows: Vec<[f64; 3]> = samples
        .iter()
        .map(|&(d, v)| [d.ln(), (log_shift - d.ln()).ln(), v.ln()])
        .collect();
    let n = rows.len() as f64;
    let mean: [f64; 3] = [0, 1, 2].map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n);
    let mut sxx = 0.0;
    let mut sxl = 0.0;
    let mut sll = 0.0;
    let mut sxy = 0.0;
    let mut sly = 0.0;
    for r in &rows {
        let (x, l, y) = (r[0] - mean[0], r[1] - mean[1], r[2] - mean[2]);
        sxx += x * x;
        sxl += x * l;
        sll += l * l;
        sxy += x * y;
        sly += l * y;
    }
    let (e, beta) = match solve3([[sxx, sxl, 0.0], [sxl, sll, 0.0], [0.0, 0.0, 1.0]], [sxy, sly, 0.0]) {
        Some([e, beta, _]) if rows.len() >= 3 => (e, beta),
        _ => (if sxx > 0.0 { sxy / sxx } else { 0.0 }, 0.0),
    };
    let log_coef = mean[2] - e * mean[0] - beta * mean[1];
    Fit {
        log_coef,
        class: AsymptoticClass {
            exponent: e,
            log_exponent: beta,
        },
        log_shift,
    }
}

fn decide(class: AsymptoticClass, threshold: f64, log_threshold: f64, margin: f64) -> Convergence {
    let gap = class.exponent - threshold;
    if gap > margin {
        return Convergence::Converges;
    }
    if gap < -margin {
        return Convergence::Diverges;
    }
    if gap.abs() > ON_THRESHOLD_TOL {
        return Convergence::Indeterminate;
    }
    let lg = class.log_exponent - log_threshold;
    if lg < -margin {
        Convergence::Converges
    } else if lg > margin {
        Convergence::Diverges
    } else {
        Convergence::Indeterminate
    }
}

/// Decides whether `∫_a^b f` is finite, where `f ≥ 0` may be singular at
/// the chosen endpoint.
pub fn classify_improper<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, end: SingularEnd) -> Result<IntegralVerdict> {
    classify_improper_with(f, a, b, end, &ClassifyOptions::default())
}

pub fn classify_improper_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    end: SingularEnd,
    opts: &ClassifyOptions,
) -> Result<IntegralVerdict> {
    if !(a < b) {
        return Err(Error::InvalidInput(format!("need a < b, got ({a}, {b})")));
    }
    let width = b - a;
    let samples = match collect(&f, a, b, end, opts)? {
        Samples::Infinite => {
            return Ok(IntegralVerdict {
                status: Convergence::Diverges,
                value: f64::INFINITY,
                divergence_rate: None,
                tolerance_used: opts.rel_tol,
            })
        }
        Samples::Vanishing => {
            let value = panel_sum(&f, a, b, end, opts)?;
            return Ok(IntegralVerdict {
                status: Convergence::Converges,
                value,
                divergence_rate: None,
                tolerance_used: opts.rel_tol,
            });
        }
        Samples::Positive(s) => s,
    };
    let fitted = fit(&samples, width, opts);
    let status = decide(fitted.class, -1.0, -1.0, opts.margin);
    let value = match status {
        Convergence::Converges => panel_sum(&f, a, b, end, opts)? + tail(&fitted, width, opts)?,
        Convergence::Diverges => f64::INFINITY,
        Convergence::Indeterminate => f64::NAN,
    };
    Ok(IntegralVerdict {
        status,
        value,
        divergence_rate: Some(fitted.class),
        tolerance_used: opts.rel_tol,
    })
}

/// Integral over the part of `(a, b)` at distance at least `d_kmax` from the
/// singular end, summed over geometric panels.
fn panel_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, end: SingularEnd, opts: &ClassifyOptions) -> Result<f64> {
    let width = b - a;
    let mut total = 0.0;
    for k in 0..opts.k_max {
        let d_hi = width * 2f64.powi(-(k as i32));
        let d_lo = width * 2f64.powi(-(k as i32 + 1));
        let (x0, x1) = match end {
            SingularEnd::Left => (a + d_lo, a + d_hi),
            SingularEnd::Right => (b - d_hi, b - d_lo),
        };
        total += integrate_adaptive(f, x0, x1, opts.rel_tol * 0.1)?;
    }
    Ok(total)
}

/// Integral of the fitted asymptotic model over `(0, d_kmax)`.
fn tail(fit: &Fit, width: f64, opts: &ClassifyOptions) -> Result<f64> {
    let d_k = width * 2f64.powi(-(opts.k_max as i32));
    let big_l = fit.log_shift - d_k.ln();
    let AsymptoticClass {
        exponent: e,
        log_exponent: beta,
    } = fit.class;
    let scale = (fit.log_coef + (e + 1.0) * d_k.ln()).exp();
    let rate = e + 1.0;
    if rate.abs() < 1e-6 {
        if beta < -1.0 {
            return Ok(scale * big_l.powf(beta + 1.0) / (-beta - 1.0));
        }
        return Ok(f64::INFINITY);
    }
    if beta.abs() < 1e-9 {
        return Ok(scale / rate);
    }
    let integral = integrate_to_infinity(|x| (-rate * x).exp() * (big_l + x).powf(beta), 0.0, opts.rel_tol)?;
    Ok(scale * integral)
}

/// Decides whether `sup_{(a,b)} g` is finite when `g ≥ 0` may blow up at the
/// chosen endpoint; the supremum is evaluated on a logarithmic grid.
pub fn classify_sup<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, end: SingularEnd) -> Result<SupVerdict> {
    classify_sup_with(g, a, b, end, &ClassifyOptions::default())
}

pub fn classify_sup_with<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    end: SingularEnd,
    opts: &ClassifyOptions,
) -> Result<SupVerdict> {
    if !(a < b) {
        return Err(Error::InvalidInput(format!("need a < b, got ({a}, {b})")));
    }
    let width = b - a;
    let (status, rate) = match collect(&g, a, b, end, opts)? {
        Samples::Infinite => (Convergence::Diverges, None),
        Samples::Vanishing => (Convergence::Converges, None),
        Samples::Positive(s) => {
            let fitted = fit(&s, width, opts);
            let c = fitted.class;
            let gap = c.exponent;
            let status = if gap > opts.margin {
                Convergence::Converges
            } else if gap < -opts.margin {
                Convergence::Diverges
            } else if gap.abs() > ON_THRESHOLD_TOL {
                Convergence::Indeterminate
            } else if c.log_exponent <= ON_THRESHOLD_TOL {
                Convergence::Converges
            } else if c.log_exponent >= opts.margin {
                Convergence::Diverges
            } else {
                Convergence::Indeterminate
            };
            (status, Some(c))
        }
    };
    let value = match status {
        Convergence::Converges => {
            let n = 400;
            let span = opts.k_max as f64;
            (0..=n)
                .map(|j| {
                    let d = width * 2f64.powf(-span * j as f64 / n as f64) * (1.0 - 1e-9);
                    g(point(a, b, end, d))
                })
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        }
        Convergence::Diverges => f64::INFINITY,
        Convergence::Indeterminate => f64::NAN,
    };
    Ok(SupVerdict { status, value, rate })
}
