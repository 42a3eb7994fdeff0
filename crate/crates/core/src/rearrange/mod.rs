//! Distribution functions, decreasing rearrangements, medians, Lorentz and
//! Marcinkiewicz norms, and the Hardy–Littlewood and subadditivity checks.

mod linear;
mod step;

pub use linear::{LinearCell, PiecewiseLinear};
pub use step::{
    check_hardy_littlewood, check_subadditivity_surrogates, decreasing_rearrangement, distribution_function,
    increasing_rearrangement, lorentz_norm, lorentz_norm_of, marcinkiewicz_norm, marcinkiewicz_norm_of, median,
    pos_neg_split, rearrangement_by_inversion, signed_rearrangement, HardyLittlewoodReport, InversionRearrangement,
    SampledFn, SubadditivityReport,
};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RearrangementKind {
    /// Constant on each `(s_j, s_{j+1}]`.
    Step,
    /// Linear between consecutive nodes.
    Linear,
}

/// A non-increasing function on `(0, M)`, left-continuous at breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rearrangement {
    kind: RearrangementKind,
    breaks: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Rearrangement {
    /// Step function with `values[j]` on `(breaks[j], breaks[j+1]]`; `breaks[0] = 0`.
    pub fn step(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidInput("step rearrangement needs one more break than values".into()));
        }
        check_shape(&breaks, &values)?;
        let mut cumulative = Vec::with_capacity(breaks.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..values.len() {
            acc += values[j] * (breaks[j + 1] - breaks[j]);
            cumulative.push(acc);
        }
        Ok(Rearrangement {
            kind: RearrangementKind::Step,
            breaks,
            values,
            cumulative,
        })
    }

    /// Continuous piecewise-linear function through `(breaks[j], values[j])`.
    pub fn linear(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() || breaks.len() < 2 {
            return Err(Error::InvalidInput("linear rearrangement needs matching nodes and values".into()));
        }
        check_shape(&breaks, &values)?;
        let mut cumulative = Vec::with_capacity(breaks.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 1..breaks.len() {
            acc += 0.5 * (values[j] + values[j - 1]) * (breaks[j] - breaks[j - 1]);
            cumulative.push(acc);
        }
        Ok(Rearrangement {
            kind: RearrangementKind::Linear,
            breaks,
            values,
            cumulative,
        })
    }

    /// Tabulated `f*` samples `(s_i, f_i)` read as a step function taking
    /// `f_i` on `(s_{i-1}, s_i]`.
    pub fn from_table(s: &[f64], f: &[f64]) -> Result<Self> {
        if s.len() != f.len() || s.is_empty() {
            return Err(Error::InvalidInput("tabulated f* needs equally many masses and values".into()));
        }
        if !(s[0] > 0.0) || s.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("tabulated masses must be positive and strictly increasing".into()));
        }
        let mut breaks = vec![0.0];
        breaks.extend_from_slice(s);
        Rearrangement::step(breaks, f.to_vec())
    }

    pub fn zero(mass: f64) -> Self {
        Rearrangement::step(vec![0.0, mass], vec![0.0]).expect("valid zero rearrangement")
    }

    pub fn kind(&self) -> RearrangementKind {
        self.kind
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// `sup` of the function, its value as `s -> 0+`.
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s > self.mass() {
            return 0.0;
        }
        match self.kind {
            RearrangementKind::Step => {
                if s <= 0.0 {
                    return self.values[0];
                }
                // First piece whose right end is >= s.
                let j = self.breaks[1..].partition_point(|&b| b < s);
                self.values[j.min(self.values.len() - 1)]
            }
            RearrangementKind::Linear => {
                let i = self.breaks.partition_point(|&b| b < s);
                if i == 0 {
                    return self.values[0];
                }
                let (s0, s1) = (self.breaks[i - 1], self.breaks[i]);
                if s1 == s {
                    return self.values[i];
                }
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                v0 + (v1 - v0) * (s - s0) / (s1 - s0)
            }
        }
    }

    /// `∫_0^s` of the function, exact on the representation.
    pub fn integral_to(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.mass());
        let i = self.breaks.partition_point(|&b| b <= s);
        if i == 0 {
            return 0.0;
        }
        if i == self.breaks.len() {
            return *self.cumulative.last().unwrap();
        }
        let base = self.cumulative[i - 1];
        let s0 = self.breaks[i - 1];
        match self.kind {
            RearrangementKind::Step => base + self.values[i - 1] * (s - s0),
            RearrangementKind::Linear => {
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                let s1 = self.breaks[i];
                let vs = v0 + (v1 - v0) * (s - s0) / (s1 - s0);
                base + 0.5 * (v0 + vs) * (s - s0)
            }
        }
    }

    pub fn total_integral(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Scales the function values by `t >= 0`.
    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= t);
        out.cumulative.iter_mut().for_each(|v| *v *= t);
        out
    }

    /// `(∫ f^q)^{1/q}`, or the supremum for `q = ∞`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.max();
        }
        let mut acc = 0.0;
        match self.kind {
            RearrangementKind::Step => {
                for j in 0..self.values.len() {
                    acc += self.values[j].powf(q) * (self.breaks[j + 1] - self.breaks[j]);
                }
            }
            RearrangementKind::Linear => {
                for j in 1..self.values.len() {
                    let (a, b) = (self.values[j - 1], self.values[j]);
                    let h = self.breaks[j] - self.breaks[j - 1];
                    acc += if (a - b).abs() <= 1e-14 * a.abs().max(b.abs()) {
                        a.powf(q) * h
                    } else {
                        h * (a.powf(q + 1.0) - b.powf(q + 1.0)) / ((q + 1.0) * (a - b))
                    };
                }
            }
        }
        acc.powf(1.0 / q)
    }
}

fn check_shape(breaks: &[f64], values: &[f64]) -> Result<()> {
    if breaks[0] != 0.0 {
        return Err(Error::InvalidInput("rearrangement must start at mass 0".into()));
    }
    if breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("rearrangement breaks must be non-decreasing".into()));
    }
    if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("rearrangement values must be finite and non-negative".into()));
    }
    if values.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-300) {
        return Err(Error::InvalidInput("rearrangement values must be non-increasing".into()));
    }
    Ok(())
}

/// A datum `f` through `f*`, `f_+*` and `f_-*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangedDatum {
    pub f_star: Rearrangement,
    pub f_plus_star: Rearrangement,
    pub f_minus_star: Rearrangement,
    /// Integrability exponent in `[1, ∞]`.
    pub q: f64,
    pub norm_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl RearrangedDatum {
    pub fn from_sampled(f: &SampledFn, q: f64) -> Result<Self> {
        check_q(q)?;
        let (plus, minus) = pos_neg_split(f);
        let f_star = decreasing_rearrangement(f);
        let norm_q = f_star.lq_norm(q);
        Ok(RearrangedDatum {
            f_star,
            f_plus_star: decreasing_rearrangement(&plus),
            f_minus_star: decreasing_rearrangement(&minus),
            q,
            norm_q,
        })
    }

    pub fn from_linear(f: &PiecewiseLinear, q: f64) -> Result<Self> {
        check_q(q)?;
        let f_star = f.abs_rearrangement();
        let norm_q = f_star.lq_norm(q);
        Ok(RearrangedDatum {
            f_star,
            f_plus_star: f.positive_part_rearrangement(),
            f_minus_star: f.negative_part_rearrangement(),
            q,
            norm_q,
        })
    }

    /// A datum known only through separately supplied `f_+*` and `f_-*`.
    pub fn from_parts(plus: Rearrangement, minus: Rearrangement, q: f64) -> Result<Self> {
        check_q(q)?;
        // f* is majorized by f_+*(s/2) + f_-*(s/2); the sum of the parts at
        // matched masses is an exact rearrangement only for disjoint supports,
        // so f* is rebuilt from the merged level sets.
        let mass = plus.mass().max(minus.mass());
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for r in [&plus, &minus] {
            match r.kind() {
                RearrangementKind::Step => {
                    for j in 0..r.values.len() {
                        pieces.push((r.values[j], r.breaks[j + 1] - r.breaks[j]));
                    }
                }
                RearrangementKind::Linear => {
                    return Err(Error::InvalidInput("from_parts expects step rearrangements".into()));
                }
            }
        }
        pieces.retain(|&(v, m)| v > 0.0 && m > 0.0);
        pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        for (v, m) in pieces {
            let last = *breaks.last().unwrap();
            breaks.push(last + m);
            values.push(v);
        }
        let support = *breaks.last().unwrap();
        if support > mass * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(
                "supports of f_+ and f_- overlap: their masses exceed the domain measure".into(),
            ));
        }
        if support < mass {
            breaks.push(mass);
            values.push(0.0);
        }
        let f_star = Rearrangement::step(breaks, values)?;
        let norm_q = f_star.lq_norm(q);
        Ok(RearrangedDatum {
            f_star,
            f_plus_star: plus,
            f_minus_star: minus,
            q,
            norm_q,
        })
    }

    /// Uses `f*` for both signed parts, which majorizes each of them.
    pub fn from_majorant(f_star: Rearrangement, q: f64) -> Result<Self> {
        check_q(q)?;
        let norm_q = f_star.lq_norm(q);
        Ok(RearrangedDatum {
            f_plus_star: f_star.clone(),
            f_minus_star: f_star.clone(),
            f_star,
            q,
            norm_q,
        })
    }

    pub fn part(&self, sign: Sign) -> &Rearrangement {
        match sign {
            Sign::Plus => &self.f_plus_star,
            Sign::Minus => &self.f_minus_star,
        }
    }

    pub fn mass(&self) -> f64 {
        self.f_star.mass()
    }

    /// `|∫ f_+* - ∫ f_-*| / ∫ f*`, zero for compatible data.
    pub fn compatibility_residual(&self) -> f64 {
        let total = self.f_star.total_integral();
        if total == 0.0 {
            return 0.0;
        }
        (self.f_plus_star.total_integral() - self.f_minus_star.total_integral()).abs() / total
    }

    pub fn scaled(&self, t: f64) -> Self {
        RearrangedDatum {
            f_star: self.f_star.scaled(t),
            f_plus_star: self.f_plus_star.scaled(t),
            f_minus_star: self.f_minus_star.scaled(t),
            q: self.q,
            norm_q: self.norm_q * t,
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("integrability exponent q must lie in [1, inf], got {q}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_eval_is_left_continuous() {
        let r = Rearrangement::step(vec![0.0, 0.25, 1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(r.eval(0.25), 2.0);
        assert_eq!(r.eval(0.2500001), 1.0);
        assert_eq!(r.eval(0.0), 2.0);
        assert_eq!(r.eval(1.5), 0.0);
        assert!((r.integral_to(0.5) - 0.75).abs() < 1e-15);
        assert!((r.total_integral() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn linear_eval_and_integral() {
        let r = Rearrangement::linear(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!((r.eval(0.3) - 0.7).abs() < 1e-15);
        assert!((r.integral_to(0.5) - 0.375).abs() < 1e-15);
        assert!((r.lq_norm(2.0) - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_increasing_values() {
        assert!(Rearrangement::step(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).is_err());
        assert!(Rearrangement::from_table(&[0.5, 0.4], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn datum_from_parts() {
        let plus = Rearrangement::step(vec![0.0, 0.5, 1.0], vec![1.0, 0.0]).unwrap();
        let d = RearrangedDatum::from_parts(plus.clone(), plus, 2.0).unwrap();
        assert!((d.f_star.eval(0.9) - 1.0).abs() < 1e-15);
        assert_eq!(d.compatibility_residual(), 0.0);
        assert!((d.norm_q - 1.0).abs() < 1e-15);
    }
}
