//! Named closed-form data on `(0, T)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::Datum;
use crate::error::{Error, Result};

pub const NAMED_DATA: [&str; 7] = ["cos", "sin", "sign", "linear", "cos_mix", "radial_poly", "zero"];

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// A datum by name, scaled to `(0, length)`. All but `radial_poly` have zero
/// mean for `A ≡ 1`; `radial_poly` is `1 - c t^2` with zero mean for `A = t^{n-1}`.
///
/// Parameters: `k` (frequency of `cos`/`sin`, default 1), `n` (dimension of
/// `radial_poly`, default 3), `scale` (factor on the datum, default 1).
pub fn named_datum(id: &str, length: f64, params: &BTreeMap<String, f64>) -> Result<Datum> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(format!("datum interval length {length} must be positive")));
    }
    let k = param(params, "k", 1.0);
    let scale = param(params, "scale", 1.0);
    let w = 2.0 * PI / length;
    let d = match id {
        "cos" => Datum::new("cos", move |t| (k * w * t).cos()),
        "sin" => Datum::new("sin", move |t| (k * w * t).sin()),
        "sign" => {
            let half = 0.5 * length;
            Datum::new("sign", move |t| if t < half { 1.0 } else { -1.0 }).with_breaks(vec![half])
        }
        "linear" => Datum::new("linear", move |t| t / length - 0.5),
        "cos_mix" => Datum::new("cos_mix", move |t| (2.0 * w * t).cos() + 0.5 * (w * t).cos()),
        "radial_poly" => {
            let n = param(params, "n", 3.0);
            if !(n >= 1.0) {
                return Err(Error::InvalidInput(format!("radial_poly needs n >= 1, got n = {n}")));
            }
            let c = (n + 2.0) / (n * length * length);
            Datum::new("radial_poly", move |t| 1.0 - c * t * t)
        }
        "zero" => Datum::zero(),
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown datum {id:?}; expected one of {}",
                NAMED_DATA.join(", ")
            )))
        }
    };
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!("datum frequency k = {k} must be positive")));
    }
    Ok(if scale == 1.0 { d } else { d.scaled(scale) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_weighted_neumann, SolverGrid};
    use std::sync::Arc;

    #[test]
    fn named_data_are_compatible() {
        let none = BTreeMap::new();
        let g = SolverGrid::new(1.0, 1000).unwrap();
        let unit: crate::numerics::RealFn = Arc::new(|_| 1.0);
        for id in ["cos", "sin", "sign", "linear", "cos_mix", "zero"] {
            let d = named_datum(id, 1.0, &none).unwrap();
            assert!(solve_weighted_neumann(&unit, 2.0, &d, g).is_ok(), "{id}");
        }
        let len = 3f64.powf(1.0 / 3.0);
        let ball: crate::numerics::RealFn = Arc::new(|t: f64| t * t);
        let d = named_datum("radial_poly", len, &none).unwrap();
        assert!(solve_weighted_neumann(&ball, 2.0, &d, SolverGrid::new(len, 1000).unwrap()).is_ok());
    }

    #[test]
    fn unknown_datum_is_named() {
        let e = named_datum("tent", 1.0, &BTreeMap::new()).unwrap_err();
        assert!(e.to_string().contains("tent"));
    }
}
