//! Integration against the measure `d(-D phi)` with `phi = nu^{1/(1-p)}`,
//! represented by its density.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use super::quadrature::integrate_adaptive;
use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Density of a non-negative absolutely continuous measure on `(0, M/2)`.
#[derive(Clone)]
pub enum StieltjesWeight {
    /// Closed-form density `w(r)`.
    Density(RealFn),
    /// Density `-phi'(r)` by centred differences with step `r * 1e-6`.
    FiniteDifference(RealFn),
}

impl fmt::Debug for StieltjesWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StieltjesWeight::Density(_) => f.write_str("StieltjesWeight::Density"),
            StieltjesWeight::FiniteDifference(_) => f.write_str("StieltjesWeight::FiniteDifference"),
        }
    }
}

pub const FD_RELATIVE_STEP: f64 = 1e-6;

impl StieltjesWeight {
    pub fn density<F: Fn(f64) -> f64 + Send + Sync + 'static>(w: F) -> Self {
        StieltjesWeight::Density(Arc::new(w))
    }

    pub fn from_phi<F: Fn(f64) -> f64 + Send + Sync + 'static>(phi: F) -> Self {
        StieltjesWeight::FiniteDifference(Arc::new(phi))
    }

    /// Weight value together with a scale used to judge round-off in the sign test.
    fn sample(&self, r: f64) -> (f64, f64) {
        match self {
            StieltjesWeight::Density(w) => (w(r), 0.0),
            StieltjesWeight::FiniteDifference(phi) => {
                let h = r * FD_RELATIVE_STEP;
                let (lo, hi) = (phi(r - h), phi(r + h));
                let w = (lo - hi) / (2.0 * h);
                (w, 1e-7 * (lo.abs() + hi.abs()) / h)
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.sample(r).0
    }
}

/// `∫_a^b g(r) w(r) dr` for the density `w` of `weight`.
pub fn stieltjes_integrate<G: Fn(f64) -> f64>(g: G, weight: &StieltjesWeight, a: f64, b: f64) -> Result<f64> {
    stieltjes_integrate_tol(g, weight, a, b, super::quadrature::PROPER_REL_TOL)
}

pub fn stieltjes_integrate_tol<G: Fn(f64) -> f64>(
    g: G,
    weight: &StieltjesWeight,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    let negative: Cell<Option<(f64, f64)>> = Cell::new(None);
    let integrand = |r: f64| {
        let (w, noise) = weight.sample(r);
        if w < -noise {
            if negative.get().is_none() {
                negative.set(Some((r, w)));
            }
            return f64::NAN;
        }
        let w = w.max(0.0);
        if w == 0.0 {
            return 0.0;
        }
        g(r) * w
    };
    let out = integrate_adaptive(integrand, a, b, rel_tol);
    if let Some((r, value)) = negative.get() {
        return Err(Error::NegativeWeight { r, value });
    }
    out
}
