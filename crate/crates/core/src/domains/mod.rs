//! Domain catalog: isocapacitary functions `nu_p`, isoperimetric functions
//! `lambda`, volume transforms and one-dimensional condenser capacities.

mod capacity;
mod profile;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use capacity::{condenser_capacity_1d, condenser_capacity_radial, Capacity};
pub use profile::{Profile, SectionWeight};

use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, integrate_log_scale, AsymptoticClass, RealFn, StieltjesWeight};
use profile::require;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    /// Exact for the weighted one-dimensional model.
    Exact,
    /// Correct up to multiplicative constants in both directions.
    TwoSided,
    /// Only a lower bound; constants unknown.
    LowerBoundOnly,
}

impl Exactness {
    pub fn is_lower_bound_only(self) -> bool {
        self == Exactness::LowerBoundOnly
    }

    /// The weaker of two pieces of information.
    pub fn combine(self, other: Exactness) -> Exactness {
        use Exactness::*;
        match (self, other) {
            (LowerBoundOnly, _) | (_, LowerBoundOnly) => LowerBoundOnly,
            (TwoSided, _) | (_, TwoSided) => TwoSided,
            _ => Exact,
        }
    }
}

/// Explicit `nu_p` for custom domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuModel {
    /// `coef * s^exponent`
    Power {
        #[serde(default = "one")]
        coef: f64,
        exponent: f64,
    },
    /// `coef * s^exponent * log(M/s)^log_exponent`
    PowerLog {
        #[serde(default = "one")]
        coef: f64,
        exponent: f64,
        log_exponent: f64,
    },
    Constant { value: f64 },
    /// `(M/2 - s)^(1-p)`, the interval with unit cross-section.
    Interval,
}

/// Explicit `lambda` for custom domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaModel {
    Power {
        #[serde(default = "one")]
        coef: f64,
        exponent: f64,
    },
    Constant { value: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    LipschitzBall {
        n: u32,
    },
    Holder {
        n: u32,
        alpha: f64,
    },
    GammaJohn {
        n: u32,
        gamma: f64,
    },
    Cusp {
        n: u32,
        theta: Profile,
        #[serde(default = "one")]
        length: f64,
    },
    Funnel {
        n: u32,
        zeta: Profile,
    },
    CouhilComb {
        delta: Profile,
    },
    NikodymComb {
        delta: Profile,
    },
    Custom {
        nu: NuModel,
        #[serde(default)]
        lambda: Option<LambdaModel>,
    },
}

/// A parametrized member of the domain catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Normalization of the cross-section measure.
    #[serde(default = "one")]
    pub c0: f64,
    /// Measure of the domain; derived from the profile for cusps and funnels.
    #[serde(default)]
    pub measure: Option<f64>,
}

impl DomainSpec {
    pub fn new(family: Family) -> Self {
        DomainSpec {
            family,
            c0: 1.0,
            measure: None,
        }
    }

    pub fn ball(n: u32) -> Self {
        DomainSpec::new(Family::LipschitzBall { n })
    }

    pub fn holder(n: u32, alpha: f64) -> Self {
        DomainSpec::new(Family::Holder { n, alpha })
    }

    pub fn gamma_john(n: u32, gamma: f64) -> Self {
        DomainSpec::new(Family::GammaJohn { n, gamma })
    }

    pub fn cusp(n: u32, theta: Profile) -> Self {
        DomainSpec::new(Family::Cusp { n, theta, length: 1.0 })
    }

    pub fn funnel(n: u32, zeta: Profile) -> Self {
        DomainSpec::new(Family::Funnel { n, zeta })
    }

    pub fn couhil(alpha: f64) -> Self {
        DomainSpec::new(Family::CouhilComb {
            delta: Profile::power(alpha),
        })
    }

    pub fn nikodym(alpha: f64) -> Self {
        DomainSpec::new(Family::NikodymComb {
            delta: Profile::power(alpha),
        })
    }

    pub fn custom(nu: NuModel, measure: f64) -> Self {
        DomainSpec {
            family: Family::Custom { nu, lambda: None },
            c0: 1.0,
            measure: Some(measure),
        }
    }

    /// Attaches an isoperimetric model to a custom domain.
    pub fn with_lambda(mut self, model: LambdaModel) -> Self {
        if let Family::Custom { lambda, .. } = &mut self.family {
            *lambda = Some(model);
        }
        self
    }

    pub fn interval(measure: f64) -> Self {
        DomainSpec::custom(NuModel::Interval, measure)
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::LipschitzBall { .. } => "lipschitz_ball",
            Family::Holder { .. } => "holder",
            Family::GammaJohn { .. } => "gamma_john",
            Family::Cusp { .. } => "cusp",
            Family::Funnel { .. } => "funnel",
            Family::CouhilComb { .. } => "couhil_comb",
            Family::NikodymComb { .. } => "nikodym_comb",
            Family::Custom { .. } => "custom",
        }
    }

    /// The dimension of the domain; comb domains are planar.
    pub fn dimension(&self) -> Option<u32> {
        match self.family {
            Family::LipschitzBall { n }
            | Family::Holder { n, .. }
            | Family::GammaJohn { n, .. }
            | Family::Cusp { n, .. }
            | Family::Funnel { n, .. } => Some(n),
            Family::CouhilComb { .. } | Family::NikodymComb { .. } => Some(2),
            Family::Custom { .. } => None,
        }
    }

    fn section(&self) -> Option<SectionWeight> {
        match self.family {
            Family::Cusp { n, theta, .. } => Some(SectionWeight {
                profile: theta,
                n,
                c0: self.c0,
            }),
            Family::Funnel { n, zeta } => Some(SectionWeight {
                profile: zeta,
                n,
                c0: self.c0,
            }),
            Family::LipschitzBall { n } => Some(SectionWeight {
                profile: Profile::power(1.0),
                n,
                c0: self.c0,
            }),
            _ => None,
        }
    }

    /// Checks the parameter conditions that do not involve `p`.
    pub fn validate(&self) -> Result<()> {
        require(self.c0 > 0.0, "c0 > 0", || format!("c0 = {}", self.c0))?;
        if let Some(n) = self.dimension() {
            require(n >= 2, "dimension n >= 2", || format!("n = {n}"))?;
        }
        if let Some(m) = self.measure {
            require(m > 0.0 && m.is_finite(), "positive finite measure", || format!("measure = {m}"))?;
        }
        match self.family {
            Family::Holder { alpha, .. } => {
                require(alpha > 0.0 && alpha < 1.0, "Hölder exponent 0 < alpha < 1", || {
                    format!("alpha = {alpha}")
                })
            }
            Family::GammaJohn { gamma, .. } => require(gamma >= 1.0, "John exponent gamma >= 1", || {
                format!("gamma = {gamma}")
            }),
            Family::Cusp { theta, length, .. } => {
                require(self.measure.is_none(), "cusp measure is determined by its profile", || {
                    "remove the measure key".into()
                })?;
                require(length > 0.0, "cusp length L > 0", || format!("L = {length}"))?;
                let ok = matches!(theta, Profile::Power { coef, exponent } if coef > 0.0 && exponent >= 1.0);
                require(ok, "cusp profile theta differentiable, convex, theta(0) = 0", || {
                    format!("{theta:?} (use a power profile with exponent >= 1)")
                })
            }
            Family::Funnel { n, zeta } => {
                require(self.measure.is_none(), "funnel measure is determined by its profile", || {
                    "remove the measure key".into()
                })?;
                let ok = !matches!(zeta, Profile::Power { .. }) && zeta.is_convex();
                require(ok, "funnel profile zeta convex, positive, zeta -> 0 at infinity", || {
                    format!("{zeta:?}")
                })?;
                let tail = SectionWeight {
                    profile: zeta,
                    n,
                    c0: self.c0,
                }
                .tail(0.0);
                require(tail.is_finite(), "finite funnel volume: integral of zeta^(n-1) over (0, inf) < inf", || {
                    format!("{zeta:?} with n = {n}")
                })
            }
            Family::CouhilComb { delta } => match delta {
                Profile::Power { coef, exponent } => {
                    require(coef > 0.0, "corridor width delta > 0", || format!("coef = {coef}"))?;
                    require(
                        exponent > 1.0,
                        "s^(1+eps)/delta(s) non-increasing for some eps > 0",
                        || format!("delta = s^{exponent}"),
                    )
                }
                _ => Err(Error::domain("comb corridor profile must be a power law", format!("{delta:?}"))),
            },
            Family::NikodymComb { delta } => match delta {
                Profile::Power { coef, exponent } => {
                    require(coef > 0.0, "corridor width delta increasing", || format!("coef = {coef}"))?;
                    require(
                        exponent >= 1.0,
                        "delta Lipschitz with delta(2s) <= c delta(s) <= c' s",
                        || format!("delta = s^{exponent}"),
                    )
                }
                _ => Err(Error::domain("comb corridor profile must be a power law", format!("{delta:?}"))),
            },
            Family::Custom { nu, lambda } => {
                match nu {
                    NuModel::Power { coef, exponent } | NuModel::PowerLog { coef, exponent, .. } => {
                        require(coef > 0.0, "nu_p strictly positive", || format!("coef = {coef}"))?;
                        require(exponent >= 0.0, "nu_p non-decreasing", || format!("exponent = {exponent}"))?;
                        if let NuModel::PowerLog { log_exponent, .. } = nu {
                            require(log_exponent <= 0.0 || exponent > 0.0, "nu_p non-decreasing", || {
                                format!("log exponent = {log_exponent}")
                            })?;
                        }
                    }
                    NuModel::Constant { value } => {
                        require(value > 0.0, "nu_p strictly positive", || format!("value = {value}"))?
                    }
                    NuModel::Interval => {}
                }
                match lambda {
                    Some(LambdaModel::Power { coef, exponent }) => {
                        require(coef > 0.0 && exponent >= 0.0, "lambda positive and non-decreasing", || {
                            format!("coef = {coef}, exponent = {exponent}")
                        })
                    }
                    Some(LambdaModel::Constant { value }) => {
                        require(value > 0.0, "lambda positive", || format!("value = {value}"))
                    }
                    None => Ok(()),
                }
            }
            Family::LipschitzBall { .. } => Ok(()),
        }
    }

    /// Measure `|Ω|` of the domain.
    pub fn total_measure(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self.family {
            Family::Cusp { length, .. } => self.section().unwrap().cumulative(length),
            Family::Funnel { .. } => self.section().unwrap().tail(0.0),
            _ => self.measure.unwrap_or(1.0),
        })
    }

    /// Checks the conditions involving `p`.
    pub fn validate_p(&self, p: f64) -> Result<()> {
        self.validate()?;
        require(p > 1.0 && p.is_finite(), "p > 1", || format!("p = {p}"))?;
        match self.family {
            Family::LipschitzBall { n } => require(p <= n as f64, "1 < p <= n for the ball model", || {
                format!("p = {p}, n = {n}")
            }),
            Family::Holder { n, alpha } => {
                let bound = (n - 1) as f64 / alpha + 1.0;
                require(p < bound, "p < (n-1)/alpha + 1 for Hölder domains", || {
                    format!("p = {p}, bound = {bound}")
                })
            }
            Family::GammaJohn { n, gamma } => {
                let bound = p / (n - 1) as f64 + 1.0;
                require(gamma <= bound, "gamma <= p/(n-1) + 1 for gamma-John domains", || {
                    format!("gamma = {gamma}, bound = {bound}")
                })
            }
            Family::CouhilComb { delta } => {
                require(p <= 2.0, "1 <= p <= 2 for the Couhil comb", || format!("p = {p}"))?;
                let Profile::Power { exponent, .. } = delta else { unreachable!() };
                require(exponent <= p + 1.0, "s^(p+1)/delta(s) non-decreasing", || {
                    format!("delta = s^{exponent}, p = {p}")
                })
            }
            _ => Ok(()),
        }
    }
}

/// Volume transform `Θ(ρ) = c0 ∫_0^ρ θ^{n-1}` of a cusp.
pub fn theta_transform(domain: &DomainSpec, rho: f64) -> Result<f64> {
    let Family::Cusp { length, .. } = domain.family else {
        return Err(Error::InvalidInput("theta_transform needs a cusp".into()));
    };
    domain.validate()?;
    require((0.0..=length).contains(&rho), "rho within the cusp profile interval", || {
        format!("rho = {rho}, L = {length}")
    })?;
    Ok(domain.section().unwrap().cumulative(rho))
}

/// Tail transform `Υ(ρ) = c0 ∫_ρ^∞ ζ^{n-1}` of a funnel.
pub fn upsilon_transform(domain: &DomainSpec, rho: f64) -> Result<f64> {
    let Family::Funnel { .. } = domain.family else {
        return Err(Error::InvalidInput("upsilon_transform needs a funnel".into()));
    };
    domain.validate()?;
    require(rho >= 0.0, "rho >= 0", || format!("rho = {rho}"))?;
    Ok(domain.section().unwrap().tail(rho))
}

/// The isocapacitary function `s -> nu_p(s)` on `(0, M/2)`.
#[derive(Clone)]
pub struct IsocapFn {
    pub p: f64,
    pub measure: f64,
    pub exactness: Exactness,
    /// Power/log class of `nu_p` at `s -> 0`.
    pub asymptotic: Option<AsymptoticClass>,
    pub weight: StieltjesWeight,
    pub label: String,
    nu: RealFn,
    phi: Option<RealFn>,
}

impl fmt::Debug for IsocapFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsocapFn")
            .field("label", &self.label)
            .field("p", &self.p)
            .field("measure", &self.measure)
            .field("exactness", &self.exactness)
            .field("asymptotic", &self.asymptotic)
            .finish()
    }
}

impl IsocapFn {
    /// A user-supplied `nu_p`; the Stieltjes weight is taken by finite differences.
    pub fn from_fn<F>(p: f64, measure: f64, exactness: Exactness, label: &str, nu: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let nu: RealFn = Arc::new(nu);
        let nu2 = nu.clone();
        IsocapFn {
            p,
            measure,
            exactness,
            asymptotic: None,
            weight: StieltjesWeight::from_phi(move |r| nu2(r).powf(1.0 / (1.0 - p))),
            label: label.to_string(),
            nu,
            phi: None,
        }
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        (self.nu)(s)
    }

    /// `nu_p(s)^{1/(1-p)}`.
    pub fn phi(&self, s: f64) -> f64 {
        match &self.phi {
            Some(phi) => phi(s),
            None => self.evaluate(s).powf(1.0 / (1.0 - self.p)),
        }
    }

    pub fn half_measure(&self) -> f64 {
        0.5 * self.measure
    }
}

/// The isoperimetric function `s -> lambda(s)` on `(0, M/2)`.
#[derive(Clone)]
pub struct IsoperFn {
    pub measure: f64,
    pub exactness: Exactness,
    pub asymptotic: Option<AsymptoticClass>,
    pub label: String,
    lambda: RealFn,
}

impl fmt::Debug for IsoperFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsoperFn")
            .field("label", &self.label)
            .field("measure", &self.measure)
            .field("exactness", &self.exactness)
            .field("asymptotic", &self.asymptotic)
            .finish()
    }
}

impl IsoperFn {
    pub fn from_fn<F>(measure: f64, exactness: Exactness, label: &str, lambda: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        IsoperFn {
            measure,
            exactness,
            asymptotic: None,
            label: label.to_string(),
            lambda: Arc::new(lambda),
        }
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        (self.lambda)(s)
    }
}

fn power_class(exponent: f64) -> Option<AsymptoticClass> {
    Some(AsymptoticClass {
        exponent,
        log_exponent: 0.0,
    })
}

/// `coef * s^theta` with its closed-form weight.
fn power_nu(p: f64, measure: f64, coef: f64, theta: f64, exactness: Exactness, label: String) -> IsocapFn {
    let a = theta / (1.0 - p);
    let c = coef.powf(1.0 / (1.0 - p));
    IsocapFn {
        p,
        measure,
        exactness,
        asymptotic: power_class(theta),
        weight: StieltjesWeight::density(move |r: f64| -c * a * r.powf(a - 1.0)),
        label,
        nu: Arc::new(move |s: f64| coef * s.powf(theta)),
        phi: Some(Arc::new(move |s: f64| c * s.powf(a))),
    }
}

/// `coef * s^theta * log(M/s)^beta` with its closed-form weight.
fn power_log_nu(p: f64, measure: f64, coef: f64, theta: f64, beta: f64, exactness: Exactness, label: String) -> IsocapFn {
    let a = theta / (1.0 - p);
    let b = beta / (1.0 - p);
    let c = coef.powf(1.0 / (1.0 - p));
    IsocapFn {
        p,
        measure,
        exactness,
        asymptotic: Some(AsymptoticClass {
            exponent: theta,
            log_exponent: beta,
        }),
        weight: StieltjesWeight::density(move |r: f64| {
            let l = (measure / r).ln();
            -c * r.powf(a - 1.0) * l.powf(b - 1.0) * (a * l - b)
        }),
        label,
        nu: Arc::new(move |s: f64| coef * s.powf(theta) * (measure / s).ln().powf(beta)),
        phi: Some(Arc::new(move |s: f64| c * s.powf(a) * (measure / s).ln().powf(b))),
    }
}

/// End-anchored condenser capacity of a profile domain.
fn profile_nu(p: f64, measure: f64, section: SectionWeight, from_origin: bool, class: Option<AsymptoticClass>, label: String) -> IsocapFn {
    let half = 0.5 * measure;
    let coord = move |s: f64| {
        if from_origin {
            section.cumulative_inverse(s)
        } else {
            section.tail_inverse(s)
        }
    };
    let g = coord(half);
    let energy = move |s: f64| {
        let t = coord(s);
        if from_origin {
            section.inverse_power_integral(p, t, g)
        } else {
            section.inverse_power_integral(p, g, t)
        }
    };
    let pp = p / (p - 1.0);
    IsocapFn {
        p,
        measure,
        exactness: Exactness::Exact,
        asymptotic: class,
        weight: StieltjesWeight::density(move |r: f64| section.eval(coord(r)).powf(-pp)),
        label,
        nu: Arc::new(move |s: f64| energy(s).powf(1.0 - p)),
        phi: Some(Arc::new(energy)),
    }
}

/// The cataloged `nu_p` of `domain`, with all multiplicative constants 1.
pub fn nu_p(domain: &DomainSpec, p: f64) -> Result<IsocapFn> {
    domain.validate_p(p)?;
    let measure = domain.total_measure()?;
    let label = format!("{} nu_{p}", domain.family_name());
    Ok(match domain.family {
        Family::LipschitzBall { n } => {
            let nf = n as f64;
            if p < nf {
                power_nu(p, measure, 1.0, (nf - p) / nf, Exactness::TwoSided, label)
            } else {
                power_log_nu(p, measure, 1.0, 0.0, 1.0 - nf, Exactness::TwoSided, label)
            }
        }
        Family::Holder { n, alpha } => {
            let theta = 1.0 - alpha * p / ((n - 1) as f64 + alpha);
            power_nu(p, measure, 1.0, theta, Exactness::LowerBoundOnly, label)
        }
        Family::GammaJohn { n, gamma } => {
            let nf = n as f64;
            let theta = ((nf - 1.0) * gamma + 1.0 - p) / nf;
            if gamma > (p - 1.0) / (nf - 1.0) {
                power_nu(p, measure, 1.0, theta, Exactness::LowerBoundOnly, label)
            } else {
                power_nu(p, measure, 1.0, 0.0, Exactness::LowerBoundOnly, label)
            }
        }
        Family::Cusp { n, theta, .. } => {
            let Profile::Power { exponent: kappa, .. } = theta else { unreachable!() };
            let k = (n - 1) as f64;
            let m = kappa * k + 1.0;
            let e = kappa * k / (p - 1.0);
            let class = if (e - 1.0).abs() < 1e-12 {
                Some(AsymptoticClass {
                    exponent: 0.0,
                    log_exponent: 1.0 - p,
                })
            } else if e > 1.0 {
                power_class((m - p) / m)
            } else {
                power_class(0.0)
            };
            profile_nu(p, measure, domain.section().unwrap(), true, class, label)
        }
        Family::Funnel { n, zeta } => {
            let k = (n - 1) as f64;
            let class = match zeta {
                Profile::ShiftedPower { exponent } => {
                    let kk = exponent * k;
                    power_class((kk + p - 1.0) / (kk - 1.0))
                }
                Profile::Exponential { .. } => power_class(1.0),
                Profile::Power { .. } => None,
            };
            profile_nu(p, measure, domain.section().unwrap(), false, class, label)
        }
        Family::CouhilComb { delta } => {
            let Profile::Power { coef, exponent } = delta else { unreachable!() };
            // delta(s^{1/2}) s^{(1-p)/2}
            power_nu(p, measure, coef, (exponent + 1.0 - p) / 2.0, Exactness::TwoSided, label)
        }
        Family::NikodymComb { delta } => {
            let Profile::Power { coef, exponent } = delta else { unreachable!() };
            power_nu(p, measure, coef, exponent, Exactness::TwoSided, label)
        }
        Family::Custom { nu, .. } => match nu {
            NuModel::Power { coef, exponent } => power_nu(p, measure, coef, exponent, Exactness::Exact, label),
            NuModel::PowerLog {
                coef,
                exponent,
                log_exponent,
            } => power_log_nu(p, measure, coef, exponent, log_exponent, Exactness::Exact, label),
            NuModel::Constant { value } => power_nu(p, measure, value, 0.0, Exactness::Exact, label),
            NuModel::Interval => {
                let half = 0.5 * measure;
                IsocapFn {
                    p,
                    measure,
                    exactness: Exactness::Exact,
                    asymptotic: power_class(0.0),
                    weight: StieltjesWeight::density(|_| 1.0),
                    label,
                    nu: Arc::new(move |s: f64| (half - s).powf(1.0 - p)),
                    phi: Some(Arc::new(move |s: f64| half - s)),
                }
            }
        },
    })
}

fn power_lambda(measure: f64, coef: f64, exponent: f64, exactness: Exactness, label: String) -> IsoperFn {
    IsoperFn {
        measure,
        exactness,
        asymptotic: power_class(exponent),
        label,
        lambda: Arc::new(move |s: f64| coef * s.powf(exponent)),
    }
}

/// The cataloged isoperimetric function of `domain`, constants 1.
pub fn lambda_iso(domain: &DomainSpec) -> Result<IsoperFn> {
    let measure = domain.total_measure()?;
    let label = format!("{} lambda", domain.family_name());
    Ok(match domain.family {
        Family::LipschitzBall { n } => {
            let nf = n as f64;
            power_lambda(measure, 1.0, (nf - 1.0) / nf, Exactness::TwoSided, label)
        }
        Family::Holder { n, alpha } => {
            let k = (n - 1) as f64;
            power_lambda(measure, 1.0, k / (k + alpha), Exactness::LowerBoundOnly, label)
        }
        Family::GammaJohn { n, gamma } => {
            let nf = n as f64;
            power_lambda(measure, 1.0, (nf - 1.0) * gamma / nf, Exactness::LowerBoundOnly, label)
        }
        Family::Cusp { n, theta, .. } => {
            let section = domain.section().unwrap();
            let Profile::Power { exponent: kappa, .. } = theta else { unreachable!() };
            let k = (n - 1) as f64;
            IsoperFn {
                measure,
                exactness: Exactness::Exact,
                asymptotic: power_class(kappa * k / (kappa * k + 1.0)),
                label,
                lambda: Arc::new(move |s: f64| section.eval(section.cumulative_inverse(s))),
            }
        }
        Family::Funnel { .. } => {
            let section = domain.section().unwrap();
            IsoperFn {
                measure,
                exactness: Exactness::Exact,
                asymptotic: power_class(1.0),
                label,
                lambda: Arc::new(move |s: f64| section.eval(section.tail_inverse(s))),
            }
        }
        Family::CouhilComb { delta } => {
            let Profile::Power { coef, exponent } = delta else { unreachable!() };
            power_lambda(measure, coef, exponent / 2.0, Exactness::TwoSided, label)
        }
        Family::NikodymComb { delta } => {
            let Profile::Power { coef, exponent } = delta else { unreachable!() };
            power_lambda(measure, coef, exponent, Exactness::TwoSided, label)
        }
        Family::Custom { lambda, .. } => match lambda {
            Some(LambdaModel::Power { coef, exponent }) => power_lambda(measure, coef, exponent, Exactness::Exact, label),
            Some(LambdaModel::Constant { value }) => power_lambda(measure, value, 0.0, Exactness::Exact, label),
            None => {
                return Err(Error::InvalidInput(
                    "custom domain has no isoperimetric function; add a lambda model".into(),
                ))
            }
        },
    })
}

const LAMBDA_ROUTE_REL_TOL: f64 = 1e-10;

/// `(∫_s^{M/2} lambda^{-p'})^{1-p}`, a lower bound for `nu_p`.
///
/// A divergent inner integral gives the value 0.
pub fn nu_from_lambda(lam: &IsoperFn, p: f64, measure: f64) -> IsocapFn {
    let half = 0.5 * measure;
    let pp = p / (p - 1.0);
    let l1 = lam.clone();
    let inner = move |s: f64| -> f64 {
        if s >= half {
            return 0.0;
        }
        let f = |r: f64| l1.evaluate(r).powf(-pp);
        let v = if half / s > 4.0 {
            integrate_log_scale(f, s, half, LAMBDA_ROUTE_REL_TOL)
        } else {
            integrate_adaptive(f, s, half, LAMBDA_ROUTE_REL_TOL)
        };
        v.unwrap_or(f64::INFINITY)
    };
    let inner: RealFn = Arc::new(inner);
    let inner2 = inner.clone();
    let l2 = lam.clone();
    let asymptotic = lam.asymptotic.and_then(|c| {
        if c.log_exponent != 0.0 {
            return None;
        }
        let t = c.exponent * pp;
        Some(if (t - 1.0).abs() < 1e-12 {
            AsymptoticClass {
                exponent: 0.0,
                log_exponent: 1.0 - p,
            }
        } else if t > 1.0 {
            AsymptoticClass {
                exponent: c.exponent * p - p + 1.0,
                log_exponent: 0.0,
            }
        } else {
            AsymptoticClass {
                exponent: 0.0,
                log_exponent: 0.0,
            }
        })
    });
    IsocapFn {
        p,
        measure,
        exactness: Exactness::LowerBoundOnly,
        asymptotic,
        weight: StieltjesWeight::density(move |r: f64| l2.evaluate(r).powf(-pp)),
        label: format!("nu_{p} from {}", lam.label),
        nu: Arc::new(move |s: f64| {
            let i = inner(s);
            if i.is_infinite() {
                0.0
            } else {
                i.powf(1.0 - p)
            }
        }),
        phi: Some(inner2),
    }
}

/// Weighted one-dimensional model `(A, T)` of a domain whose Neumann
/// problem reduces to an ODE in the profile coordinate.
#[derive(Clone)]
pub struct ProfileModel {
    pub weight: RealFn,
    pub length: f64,
    pub measure: f64,
    /// Closed-form section data; `None` for the interval model (`A ≡ 1`).
    pub section: Option<SectionWeight>,
}

impl fmt::Debug for ProfileModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProfileModel")
            .field("length", &self.length)
            .field("measure", &self.measure)
            .finish()
    }
}

impl ProfileModel {
    /// Exact `nu_p` of the weighted interval `((0, T), A dt)`.
    ///
    /// Optimal condensers are intervals anchored at one end, so `nu_p^{1/(1-p)}`
    /// is the larger of the two anchored energies `∫_a^g A^{-1/(p-1)}`.
    pub fn isocap(&self, p: f64) -> Result<IsocapFn> {
        require(p > 1.0, "p > 1", || format!("p = {p}"))?;
        let Some(section) = self.section else {
            return nu_p(&DomainSpec::interval(self.measure), p);
        };
        let (m, half) = (self.measure, 0.5 * self.measure);
        let g = section.cumulative_inverse(half);
        // (energy, anchor point) for the condenser around the origin and around T.
        let anchored = move |s: f64| -> [(f64, f64); 2] {
            let a0 = section.cumulative_inverse(s);
            let a1 = section.cumulative_inverse(m - s);
            [
                (section.inverse_power_integral(p, a0, g), a0),
                (section.inverse_power_integral(p, g, a1), a1),
            ]
        };
        let phi = move |s: f64| {
            let [e0, e1] = anchored(s);
            e0.0.max(e1.0)
        };
        let pp = p / (p - 1.0);
        let density = move |r: f64| {
            let [e0, e1] = anchored(r);
            let a = if e0.0 >= e1.0 { e0.1 } else { e1.1 };
            section.eval(a).powf(-pp)
        };
        Ok(IsocapFn {
            p,
            measure: m,
            exactness: Exactness::Exact,
            asymptotic: None,
            weight: StieltjesWeight::density(density),
            label: format!("weighted interval model nu_{p}"),
            nu: Arc::new(move |s: f64| phi(s).powf(1.0 - p)),
            phi: Some(Arc::new(phi)),
        })
    }
}

impl DomainSpec {
    /// The one-dimensional reduction, for balls, cusps and the interval model.
    pub fn profile_model(&self) -> Result<ProfileModel> {
        let measure = self.total_measure()?;
        match self.family {
            Family::LipschitzBall { .. } => {
                let section = self.section().unwrap();
                Ok(ProfileModel {
                    weight: Arc::new(move |t| section.eval(t)),
                    length: section.cumulative_inverse(measure),
                    measure,
                    section: Some(section),
                })
            }
            Family::Cusp { length, .. } => {
                let section = self.section().unwrap();
                Ok(ProfileModel {
                    weight: Arc::new(move |t| section.eval(t)),
                    length,
                    measure,
                    section: Some(section),
                })
            }
            Family::Custom {
                nu: NuModel::Interval, ..
            } => Ok(ProfileModel {
                weight: Arc::new(|_| 1.0),
                length: measure,
                measure,
                section: None,
            }),
            _ => Err(Error::Unsupported(format!(
                "{} has no bounded one-dimensional reduction",
                self.family_name()
            ))),
        }
    }
}

/// One row of the catalog listing.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub family: &'static str,
    pub parameters: &'static str,
    pub validity: &'static str,
    pub nu_p: &'static str,
    pub lambda: &'static str,
    pub exactness: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            family: "lipschitz_ball",
            parameters: "n",
            validity: "1 < p <= n",
            nu_p: "s^((n-p)/n) for p < n; log(M/s)^(1-n) for p = n",
            lambda: "s^((n-1)/n)",
            exactness: "two_sided",
        },
        CatalogEntry {
            family: "holder",
            parameters: "n, alpha in (0,1)",
            validity: "p < (n-1)/alpha + 1",
            nu_p: "s^(1 - alpha p/(n-1+alpha))",
            lambda: "s^((n-1)/(n-1+alpha))",
            exactness: "lower_bound_only",
        },
        CatalogEntry {
            family: "gamma_john",
            parameters: "n, gamma >= 1",
            validity: "gamma <= p/(n-1) + 1",
            nu_p: "s^(((n-1)gamma+1-p)/n) if gamma > (p-1)/(n-1), else 1",
            lambda: "s^((n-1)gamma/n)",
            exactness: "lower_bound_only",
        },
        CatalogEntry {
            family: "cusp",
            parameters: "n, theta (power profile, exponent >= 1), length L",
            validity: "theta convex, theta(0) = 0; any p > 1",
            nu_p: "(int_{Theta^-1(s)}^{Theta^-1(M/2)} (c0 theta^(n-1))^(-1/(p-1)))^(1-p)",
            lambda: "c0 theta(Theta^-1(s))^(n-1)",
            exactness: "exact",
        },
        CatalogEntry {
            family: "funnel",
            parameters: "n, zeta (shifted_power or exponential)",
            validity: "zeta convex, positive, vanishing at infinity, finite volume; any p > 1",
            nu_p: "(int_{Upsilon^-1(M/2)}^{Upsilon^-1(s)} (c0 zeta^(n-1))^(-1/(p-1)))^(1-p)",
            lambda: "c0 zeta(Upsilon^-1(s))^(n-1)",
            exactness: "exact",
        },
        CatalogEntry {
            family: "couhil_comb",
            parameters: "delta = coef s^alpha",
            validity: "1 < p <= 2, 1 < alpha <= p + 1",
            nu_p: "delta(s^(1/2)) s^((1-p)/2)",
            lambda: "delta(s^(1/2))",
            exactness: "two_sided",
        },
        CatalogEntry {
            family: "nikodym_comb",
            parameters: "delta = coef s^alpha",
            validity: "alpha >= 1; any p > 1",
            nu_p: "delta(s)",
            lambda: "delta(s)",
            exactness: "two_sided",
        },
        CatalogEntry {
            family: "custom",
            parameters: "nu model (power, power_log, constant, interval), optional lambda model, measure",
            validity: "nu positive and non-decreasing",
            nu_p: "as given",
            lambda: "as given",
            exactness: "exact",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_space;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ball_model_values() {
        let nu = nu_p(&DomainSpec::ball(3), 2.0).unwrap();
        assert!(rel(nu.evaluate(0.027), 0.3) < 1e-14);
        assert_eq!(nu.exactness, Exactness::TwoSided);
        assert!((nu.asymptotic.unwrap().exponent - 1.0 / 3.0).abs() < 1e-15);
        let lam = lambda_iso(&DomainSpec::ball(2)).unwrap();
        assert!(rel(lam.evaluate(0.09), 0.3) < 1e-14);
        assert!(nu_p(&DomainSpec::ball(2), 2.5).is_err());
    }

    #[test]
    fn comb_models() {
        let nu = nu_p(&DomainSpec::nikodym(1.7), 2.0).unwrap();
        assert!(rel(nu.evaluate(0.2), 0.2f64.powf(1.7)) < 1e-14);
        let lam = lambda_iso(&DomainSpec::couhil(1.6)).unwrap();
        assert!(rel(lam.evaluate(0.2), 0.2f64.powf(0.8)) < 1e-14);
        assert!(nu_p(&DomainSpec::couhil(1.6), 2.5).is_err());
        assert!(nu_p(&DomainSpec::couhil(2.7), 1.5).is_err());
        assert!(nu_p(&DomainSpec::couhil(0.9), 1.5).is_err());
    }

    #[test]
    fn cusp_lambda_closed_form() {
        let lam = lambda_iso(&DomainSpec::cusp(2, Profile::power(1.0))).unwrap();
        for s in [0.01, 0.1, 0.3] {
            assert!(rel(lam.evaluate(s), (2.0 * s as f64).sqrt()) < 1e-14);
        }
    }

    #[test]
    fn validity_errors_name_condition() {
        let err = nu_p(&DomainSpec::holder(2, 0.5), 3.5).unwrap_err();
        assert!(err.to_string().contains("(n-1)/alpha + 1"), "{err}");
        let funnel = DomainSpec::funnel(2, Profile::ShiftedPower { exponent: 0.8 });
        assert!(nu_p(&funnel, 2.0).unwrap_err().to_string().contains("finite funnel volume"));
        let cusp = DomainSpec::cusp(2, Profile::power(0.5));
        assert!(nu_p(&cusp, 2.0).unwrap_err().to_string().contains("convex"));
    }

    #[test]
    fn closed_form_weights_match_finite_differences() {
        let domains = [
            (DomainSpec::ball(3), 2.0),
            (DomainSpec::ball(2), 2.0),
            (DomainSpec::cusp(2, Profile::power(1.0)), 3.0),
            (DomainSpec::funnel(3, Profile::ShiftedPower { exponent: 2.0 }), 1.5),
            (DomainSpec::funnel(2, Profile::Exponential { rate: 1.0 }), 2.0),
            (DomainSpec::interval(1.0), 1.5),
        ];
        for (d, p) in domains {
            let nu = nu_p(&d, p).unwrap();
            for s in log_space(1e-3 * nu.half_measure(), 0.9 * nu.half_measure(), 12) {
                let h = s * 1e-6;
                let fd = (nu.phi(s - h) - nu.phi(s + h)) / (2.0 * h);
                let w = nu.weight.eval(s);
                assert!(rel(w, fd) < 1e-6, "{} at {s}: {w} vs {fd}", nu.label);
                let phi_direct = nu.evaluate(s).powf(1.0 / (1.0 - p));
                assert!(rel(nu.phi(s), phi_direct) < 1e-10);
            }
        }
    }

    #[test]
    fn deserializes_from_config_json() {
        let d: DomainSpec =
            serde_json::from_str(r#"{"family":"nikodym_comb","delta":{"kind":"power","exponent":1.4}}"#).unwrap();
        assert_eq!(d, DomainSpec::nikodym(1.4));
        let c: DomainSpec =
            serde_json::from_str(r#"{"family":"cusp","n":2,"theta":{"kind":"power","exponent":2},"c0":2.0}"#).unwrap();
        assert_eq!(c.c0, 2.0);
        assert!(matches!(c.family, Family::Cusp { length, .. } if length == 1.0));
    }

    #[test]
    fn model_isocap_matches_both_anchorings() {
        for (n, p) in [(3, 2.0), (2, 1.5), (3, 3.0)] {
            let model = DomainSpec::ball(n).profile_model().unwrap();
            let nu = model.isocap(p).unwrap();
            let (m, t) = (model.measure, model.length);
            let w = model.weight.clone();
            let cum = |x: f64| integrate_adaptive(|r| w(r), 0.0, x, 1e-13).unwrap();
            let inv = |s: f64| crate::numerics::generalized_left_inverse(cum, 0.0, t, s).value;
            let g0 = inv(0.5 * m);
            for s in [1e-3, 0.05, 0.2, 0.45] {
                let s = s * m;
                let c0 = condenser_capacity_1d(|r| w(r), p, inv(s), g0).unwrap().value;
                let wr = model.weight.clone();
                let (a1, g1) = (t - inv(m - s), t - g0);
                let c1 = condenser_capacity_1d(move |r| wr(t - r), p, a1, g1).unwrap().value;
                assert!(rel(nu.evaluate(s), c0.min(c1)) < 1e-7, "n {n} p {p} s {s}");
            }
        }
    }
}
