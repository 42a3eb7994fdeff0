use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{classify_improper, integrate_adaptive, integrate_log_scale, Convergence, SingularEnd};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub value: f64,
    /// The energy integral diverged, so the condenser has zero capacity.
    pub zero_capacity: bool,
}

const CAPACITY_REL_TOL: f64 = 1e-11;

/// Capacity of the condenser `([0, a], [0, g])` for the energy `∫ A |u'|^p`,
/// that is `(∫_a^g A^{-1/(p-1)})^{1-p}`.
pub fn condenser_capacity_1d<W: Fn(f64) -> f64>(weight: W, p: f64, a: f64, g: f64) -> Result<Capacity> {
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("p must exceed 1, got {p}")));
    }
    if !(a >= 0.0 && a < g) {
        return Err(Error::InvalidInput(format!("need 0 <= a < g, got a = {a}, g = {g}")));
    }
    let integrand = |t: f64| weight(t).powf(-1.0 / (p - 1.0));
    let energy = if a == 0.0 {
        let v = classify_improper(integrand, 0.0, g, SingularEnd::Left)?;
        match v.status {
            Convergence::Converges => v.value,
            Convergence::Diverges => f64::INFINITY,
            Convergence::Indeterminate => {
                return Err(Error::Unsupported(
                    "capacity integral near the origin is too close to the integrability threshold".into(),
                ))
            }
        }
    } else if g / a > 4.0 {
        integrate_log_scale(integrand, a, g, CAPACITY_REL_TOL)?
    } else {
        integrate_adaptive(integrand, a, g, CAPACITY_REL_TOL)?
    };
    if energy.is_infinite() {
        return Ok(Capacity {
            value: 0.0,
            zero_capacity: true,
        });
    }
    Ok(Capacity {
        value: energy.powf(1.0 - p),
        zero_capacity: false,
    })
}

/// Capacity of the spherical condenser `(B_r, B_R)` in `R^n`, with the
/// sphere measure normalized to `c0 tau^(n-1)`.
pub fn condenser_capacity_radial(n: u32, p: f64, r: f64, big_r: f64, c0: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("dimension must be at least 2, got {n}")));
    }
    if p > n as f64 {
        return Err(Error::domain(
            "1 < p <= n for the radial condenser",
            format!("p = {p}, n = {n}"),
        ));
    }
    if !(r > 0.0 && r < big_r) {
        return Err(Error::InvalidInput(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    let k = (n - 1) as f64;
    condenser_capacity_1d(|t| c0 * t.powf(k), p, r, big_r).map(|c| c.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_weight() {
        let c = condenser_capacity_1d(|_| 1.0, 2.0, 0.1, 0.5).unwrap();
        assert!((c.value - 2.5).abs() < 1e-12);
        let c = condenser_capacity_1d(|_| 1.0, 3.5, 0.1, 0.5).unwrap();
        assert!((c.value - 0.4f64.powf(-2.5)).abs() < 1e-10 * c.value);
    }

    #[test]
    fn cusp_weight() {
        let c = condenser_capacity_1d(|t| t, 3.0, 0.2, 0.7).unwrap();
        let exact = (2.0 * (0.7f64.sqrt() - 0.2f64.sqrt())).powi(-2);
        assert!((c.value - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn anchored_at_origin() {
        // ∫_0^g t^{-1/2} converges: capacity (2 sqrt g)^{-2}.
        let c = condenser_capacity_1d(|t| t, 3.0, 0.0, 0.5).unwrap();
        assert!((c.value - (2.0 * 0.5f64.sqrt()).powi(-2)).abs() < 1e-6);
        let z = condenser_capacity_1d(|t| t, 2.0, 0.0, 0.5).unwrap();
        assert!(z.zero_capacity);
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn radial_closed_forms() {
        let (r, big_r) = (0.05, 0.8);
        let c = condenser_capacity_radial(3, 2.0, r, big_r, 1.0).unwrap();
        let exact = 1.0 / (1.0 / r - 1.0 / big_r);
        assert!((c - exact).abs() < 1e-10 * exact);
        let c2 = condenser_capacity_radial(2, 2.0, r, big_r, 1.0).unwrap();
        assert!((c2 - 1.0 / (big_r / r as f64).ln()).abs() < 1e-10);
        assert!(condenser_capacity_radial(3, 3.5, r, big_r, 1.0).is_err());
    }
}
