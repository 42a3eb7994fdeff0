//! JSON run configuration.
//!
//! ```json
//! {
//!   "domain": {"family": "nikodym_comb", "delta": {"kind": "power", "exponent": 1.4}},
//!   "p": 2, "q": "inf",
//!   "sigma": 1.5, "rho": 2, "gamma": 3,
//!   "criteria": ["WP", "ISO"],
//!   "datum": {"closed_form": {"id": "cos", "params": {"k": 1}}},
//!   "grid": {"cells": 10000, "bound_points": 200, "levels": 50},
//!   "sweep": {"alpha": {"start": 1.0, "stop": 3.0, "step": 0.1}, "p": [2], "q": [2], "route": "nu"}
//! }
//! ```
//!
//! `q = inf` is spelled `"inf"`. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Deserializer};

use super::CommandKind;
use crate::domains::DomainSpec;

/// An exponent in `[1, ∞]`, written as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Word(w) if w == "inf" => Ok(Exponent(f64::INFINITY)),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumConfig {
    /// A named datum on the 1D model interval.
    ClosedForm {
        id: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        /// Subtract the weighted mean before solving.
        #[serde(default)]
        project: bool,
    },
    /// `f*` as a two-column CSV `(s, f*(s))`; only for `bound`.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Cells of the 1D solver grid.
    pub cells: usize,
    /// Points of each bound curve.
    pub bound_points: usize,
    /// Smallest `s` of the bound curves, as a fraction of the measure.
    pub s_min: f64,
    /// Refinement factor for the cell averages behind `f*`.
    pub datum_refinement: usize,
    /// Sampled levels in the level-set checks.
    pub levels: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cells: crate::solver::DEFAULT_CELLS,
            bound_points: 200,
            s_min: 1e-4,
            datum_refinement: 4,
            levels: 50,
        }
    }
}

/// Values of a swept parameter: a list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Values {
    pub fn expand(&self) -> anyhow::Result<Vec<f64>> {
        match self {
            Values::List(v) => Ok(v.clone()),
            Values::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    bail!("sweep range needs step > 0 and stop >= start");
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded to 12 digits so 1.1 + 0.1 prints as 1.2.
                Ok((0..=n)
                    .map(|k| {
                        let x = start + k as f64 * step;
                        (x * 1e12).round() / 1e12
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Through the cataloged `nu_p`.
    #[default]
    Nu,
    /// Through `nu_p` computed from the isoperimetric function.
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// The family's shape parameter: comb exponent, funnel decay, cusp
    /// exponent, Hölder alpha, John gamma or custom `nu_p` exponent.
    pub alpha: Values,
    pub p: Vec<f64>,
    pub q: Vec<Exponent>,
    #[serde(default)]
    pub route: Route,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<Exponent>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Criterion families for `analyze`: WP, SOL, GRAD, LOR, ISO, EMB.
    #[serde(default)]
    pub criteria: Option<Vec<String>>,
    #[serde(default)]
    pub datum: Option<DatumConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

pub const FAMILIES: [&str; 6] = ["WP", "SOL", "GRAD", "LOR", "ISO", "EMB"];

impl RunConfig {
    /// Parses a config; relative data paths are resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> anyhow::Result<Self> {
        let mut c: RunConfig = serde_json::from_str(text).context("invalid config")?;
        if let (Some(DatumConfig::Tabulated { path }), Some(base)) = (&mut c.datum, base) {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        Ok(c)
    }

    pub fn domain(&self, cmd: CommandKind) -> anyhow::Result<&DomainSpec> {
        self.domain.as_ref().ok_or_else(|| missing("domain", cmd))
    }

    pub fn p(&self, cmd: CommandKind) -> anyhow::Result<f64> {
        self.p.ok_or_else(|| missing("p", cmd))
    }

    /// `q`, defaulting to 2 where it only sets the datum norm.
    pub fn q_or(&self, default: f64) -> f64 {
        self.q.map(|e| e.0).unwrap_or(default)
    }

    /// Checks every precondition of `cmd` that can be checked before computing.
    pub fn validate(&self, cmd: CommandKind) -> anyhow::Result<()> {
        if let Some(c) = &self.command {
            if c != cmd.as_str() {
                bail!("config is for command {c:?} but {:?} was run", cmd.as_str());
            }
        }
        if let Some(q) = self.q {
            if !(q.0 >= 1.0) {
                bail!("q must satisfy 1 <= q <= inf (q = {})", q.0);
            }
        }
        for (name, v) in [("sigma", self.sigma), ("rho", self.rho), ("gamma", self.gamma)] {
            if let Some(x) = v {
                if !(x > 0.0) {
                    bail!("{name} must be positive ({name} = {x})");
                }
            }
        }
        let g = &self.grid;
        if g.cells < 2 || g.bound_points < 2 || g.levels < 1 || g.datum_refinement < 1 {
            bail!("grid sizes must be positive (cells >= 2, bound_points >= 2, levels >= 1, datum_refinement >= 1)");
        }
        if !(g.s_min > 0.0 && g.s_min < 0.5) {
            bail!("grid.s_min must lie in (0, 1/2) (s_min = {})", g.s_min);
        }
        match cmd {
            CommandKind::Catalog => {}
            CommandKind::Analyze => {
                let d = self.domain(cmd)?;
                d.validate_p(self.p(cmd)?)?;
                self.q.ok_or_else(|| missing("q", cmd))?;
                if let Some(list) = &self.criteria {
                    for c in list {
                        if !FAMILIES.contains(&c.as_str()) {
                            bail!("unknown criterion family {c:?}; expected one of {}", FAMILIES.join(", "));
                        }
                    }
                }
            }
            CommandKind::Bound | CommandKind::Verify => {
                let d = self.domain(cmd)?;
                d.validate_p(self.p(cmd)?)?;
                match self.datum.as_ref().ok_or_else(|| missing("datum", cmd))? {
                    DatumConfig::Tabulated { .. } if cmd == CommandKind::Verify => {
                        bail!("verify needs a closed-form datum; tabulated f* has no solution to check")
                    }
                    DatumConfig::ClosedForm { .. } => {
                        d.profile_model().map_err(|e| {
                            anyhow!("closed-form data need a domain with a one-dimensional reduction (ball, cusp or interval): {e}")
                        })?;
                    }
                    DatumConfig::Tabulated { .. } => {}
                }
            }
            CommandKind::Sweep => {
                self.domain(cmd)?.validate()?;
                let s = self.sweep.as_ref().ok_or_else(|| missing("sweep", cmd))?;
                if s.alpha.expand()?.is_empty() || s.p.is_empty() || s.q.is_empty() {
                    bail!("sweep needs at least one value of alpha, p and q");
                }
                if let Some(p) = s.p.iter().find(|p| !(**p > 1.0)) {
                    bail!("sweep p values must satisfy p > 1 (p = {p})");
                }
                if let Some(q) = s.q.iter().find(|q| !(q.0 >= 1.0)) {
                    bail!("sweep q values must satisfy 1 <= q <= inf (q = {})", q.0);
                }
            }
        }
        Ok(())
    }
}

fn missing(key: &str, cmd: CommandKind) -> anyhow::Error {
    anyhow!("config is missing {key:?}, required by {}", cmd.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inf_and_defaults() {
        let c = RunConfig::parse(
            r#"{"domain": {"family": "nikodym_comb", "delta": {"kind": "power", "exponent": 1.4}}, "p": 2, "q": "inf"}"#,
            None,
        )
        .unwrap();
        assert_eq!(c.q, Some(Exponent(f64::INFINITY)));
        assert_eq!(c.grid.cells, 10_000);
        c.validate(CommandKind::Analyze).unwrap();
    }

    #[test]
    fn errors_name_the_condition() {
        let c = RunConfig::parse(r#"{"domain": {"family": "holder", "n": 2, "alpha": 1.5}, "p": 2, "q": 2}"#, None).unwrap();
        let e = c.validate(CommandKind::Analyze).unwrap_err().to_string();
        assert!(e.contains("0 < alpha < 1"), "{e}");
        let c = RunConfig::parse(r#"{"p": 2}"#, None).unwrap();
        let e = c.validate(CommandKind::Analyze).unwrap_err().to_string();
        assert!(e.contains("domain"), "{e}");
        assert!(RunConfig::parse(r#"{"pp": 2}"#, None).is_err());
        assert!(RunConfig::parse(r#"{"q": "infinity"}"#, None).is_err());
    }

    #[test]
    fn ranges_expand_inclusively() {
        let v = Values::Range {
            start: 1.1,
            stop: 3.0,
            step: 0.1,
        };
        let x = v.expand().unwrap();
        assert_eq!(x.len(), 20);
        assert_eq!(x[1], 1.2);
        assert_eq!(*x.last().unwrap(), 3.0);
    }
}
