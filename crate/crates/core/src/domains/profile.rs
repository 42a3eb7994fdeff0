//! Radial profiles of cusps, funnels and comb corridors, with closed-form
//! cross-section integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `coef * r^exponent`
    Power {
        #[serde(default = "one")]
        coef: f64,
        exponent: f64,
    },
    /// `(1 + r)^(-exponent)`
    ShiftedPower { exponent: f64 },
    /// `exp(-rate * r)`
    Exponential { rate: f64 },
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn power(exponent: f64) -> Self {
        Profile::Power { coef: 1.0, exponent }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Power { coef, exponent } => coef * r.powf(exponent),
            Profile::ShiftedPower { exponent } => (1.0 + r).powf(-exponent),
            Profile::Exponential { rate } => (-rate * r).exp(),
        }
    }

    pub fn is_convex(&self) -> bool {
        match *self {
            Profile::Power { coef, exponent } => coef > 0.0 && (exponent >= 1.0 || exponent == 0.0),
            Profile::ShiftedPower { exponent } => exponent > 0.0,
            Profile::Exponential { rate } => rate > 0.0,
        }
    }
}

/// Cross-section weight `A(tau) = c0 * profile(tau)^(n-1)` of a profile domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionWeight {
    pub profile: Profile,
    pub n: u32,
    pub c0: f64,
}

impl SectionWeight {
    fn k(&self) -> f64 {
        (self.n - 1) as f64
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.c0 * self.profile.eval(tau).powf(self.k())
    }

    /// `∫_0^rho A`, for profiles vanishing at the origin.
    pub fn cumulative(&self, rho: f64) -> f64 {
        match self.profile {
            Profile::Power { coef, exponent } => {
                let m = exponent * self.k() + 1.0;
                self.c0 * coef.powf(self.k()) * rho.powf(m) / m
            }
            _ => f64::NAN,
        }
    }

    pub fn cumulative_inverse(&self, s: f64) -> f64 {
        match self.profile {
            Profile::Power { coef, exponent } => {
                let m = exponent * self.k() + 1.0;
                (s * m / (self.c0 * coef.powf(self.k()))).powf(1.0 / m)
            }
            _ => f64::NAN,
        }
    }

    /// `∫_rho^∞ A`, infinite when the tail is not summable.
    pub fn tail(&self, rho: f64) -> f64 {
        match self.profile {
            Profile::ShiftedPower { exponent } => {
                let k = exponent * self.k();
                if k <= 1.0 {
                    f64::INFINITY
                } else {
                    self.c0 * (1.0 + rho).powf(1.0 - k) / (k - 1.0)
                }
            }
            Profile::Exponential { rate } => {
                let k = rate * self.k();
                self.c0 * (-k * rho).exp() / k
            }
            Profile::Power { .. } => f64::INFINITY,
        }
    }

    pub fn tail_inverse(&self, s: f64) -> f64 {
        match self.profile {
            Profile::ShiftedPower { exponent } => {
                let k = exponent * self.k();
                (s * (k - 1.0) / self.c0).powf(1.0 / (1.0 - k)) - 1.0
            }
            Profile::Exponential { rate } => {
                let k = rate * self.k();
                -(s * k / self.c0).ln() / k
            }
            Profile::Power { .. } => f64::NAN,
        }
    }

    /// `∫_lo^hi A^{-1/(p-1)}` in closed form.
    pub fn inverse_power_integral(&self, p: f64, lo: f64, hi: f64) -> f64 {
        let k = self.k();
        let scale = self.c0.powf(-1.0 / (p - 1.0));
        match self.profile {
            Profile::Power { coef, exponent } => {
                let e = exponent * k / (p - 1.0);
                let c = scale * coef.powf(-k / (p - 1.0));
                if (e - 1.0).abs() < 1e-12 {
                    c * (hi / lo).ln()
                } else if lo == 0.0 && e > 1.0 {
                    f64::INFINITY
                } else {
                    c * (hi.powf(1.0 - e) - lo.powf(1.0 - e)) / (1.0 - e)
                }
            }
            Profile::ShiftedPower { exponent } => {
                let e = exponent * k / (p - 1.0);
                scale * ((1.0 + hi).powf(e + 1.0) - (1.0 + lo).powf(e + 1.0)) / (e + 1.0)
            }
            Profile::Exponential { rate } => {
                let e = rate * k / (p - 1.0);
                scale * ((e * hi).exp() - (e * lo).exp()) / e
            }
        }
    }
}

pub(crate) fn require(cond: bool, condition: &str, detail: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::domain(condition, detail()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_volume_transform() {
        let w = SectionWeight {
            profile: Profile::power(1.0),
            n: 2,
            c0: 1.0,
        };
        for rho in [0.1, 0.5, 1.0] {
            assert!((w.cumulative(rho) - rho * rho / 2.0).abs() < 1e-15);
            assert!((w.cumulative_inverse(w.cumulative(rho)) - rho).abs() < 1e-14);
        }
    }

    #[test]
    fn funnel_tail_transforms() {
        let e = SectionWeight {
            profile: Profile::Exponential { rate: 1.0 },
            n: 2,
            c0: 1.0,
        };
        let s = SectionWeight {
            profile: Profile::ShiftedPower { exponent: 2.0 },
            n: 3,
            c0: 1.0,
        };
        for rho in [0.0, 0.7, 3.0] {
            assert!((e.tail(rho) - (-rho as f64).exp()).abs() < 1e-15);
            assert!((s.tail(rho) - (1.0 + rho as f64).powi(-3) / 3.0).abs() < 1e-15);
            assert!((s.tail_inverse(s.tail(rho)) - rho).abs() < 1e-12);
            assert!((e.tail_inverse(e.tail(rho)) - rho).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_power_integral_matches_quadrature() {
        let w = SectionWeight {
            profile: Profile::ShiftedPower { exponent: 1.5 },
            n: 3,
            c0: 2.0,
        };
        let p = 1.7;
        let q = crate::numerics::integrate_adaptive(|t| w.eval(t).powf(-1.0 / (p - 1.0)), 0.3, 2.5, 1e-12).unwrap();
        let c = w.inverse_power_integral(p, 0.3, 2.5);
        assert!((q - c).abs() < 1e-10 * c);
    }
}
