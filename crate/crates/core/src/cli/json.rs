//! Byte-stable JSON: sorted keys, floats as `%.12e`, non-finite floats as
//! the strings `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::{Map, Value};

use crate::criteria::{CriterionId, CriterionReport, Verdict};
use crate::error::{Error, Result};
use crate::numerics::AsymptoticClass;
use crate::solver::CheckReport;

/// C-style `%.12e`: `1.500000000000e+00`.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return fmt_nonfinite(x).to_string();
    }
    let s = format!("{x:.12e}");
    let (m, e) = s.split_once('e').expect("exponent form");
    let e: i32 = e.parse().expect("integer exponent");
    format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

fn fmt_nonfinite(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Parses a float written by [`fmt_float`] or the word forms of non-finite values.
pub fn parse_float(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        "nan" | "NaN" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

pub fn float(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_nonfinite(x).into()),
    }
}

pub fn opt_float(x: Option<f64>) -> Value {
    x.map(float).unwrap_or(Value::Null)
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}

pub fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_float(s),
        _ => None,
    }
}

/// Builds an object from `(key, value)` pairs.
pub fn object<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect::<Map<_, _>>())
}

/// Serializes with sorted keys, two-space indentation and `%.12e` floats.
/// Integers stored as integers are written as integers.
pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_float(n.as_f64().unwrap()));
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, item, level + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, &map[*k], level + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(out, level);
            out.push('}');
        }
    }
}

fn rate_value(r: &Option<AsymptoticClass>) -> Value {
    match r {
        Some(c) => object([("exponent", float(c.exponent)), ("log_exponent", float(c.log_exponent))]),
        None => Value::Null,
    }
}

pub fn report_value(r: &CriterionReport) -> Value {
    object([
        ("criterion_id", Value::String(r.criterion_id.as_str().into())),
        (
            "parameters",
            Value::Object(r.parameters.iter().map(|(k, &v)| (k.clone(), float(v))).collect()),
        ),
        ("verdict", Value::String(r.verdict.as_str().into())),
        ("quantity", opt_float(r.quantity)),
        ("rate", rate_value(&r.rate)),
        ("label", Value::String(r.label.clone())),
        ("notes", Value::Array(r.notes.iter().map(|n| Value::String(n.clone())).collect())),
    ])
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("report is missing the key {key:?}")))
}

fn string_field(v: &Value, key: &str) -> Result<String> {
    field(v, key)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::InvalidInput(format!("report key {key:?} must be a string")))
}

fn float_field(v: &Value, key: &str) -> Result<Option<f64>> {
    match field(v, key)? {
        Value::Null => Ok(None),
        x => as_float(x)
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("report key {key:?} must be a number"))),
    }
}

/// Inverse of [`report_value`].
pub fn report_from_value(v: &Value) -> Result<CriterionReport> {
    let criterion_id: CriterionId = string_field(v, "criterion_id")?.parse()?;
    let verdict: Verdict = string_field(v, "verdict")?.parse()?;
    let mut parameters = BTreeMap::new();
    let params = field(v, "parameters")?
        .as_object()
        .ok_or_else(|| Error::InvalidInput("report parameters must be an object".into()))?;
    for (k, x) in params {
        let x = as_float(x).ok_or_else(|| Error::InvalidInput(format!("parameter {k:?} must be a number")))?;
        parameters.insert(k.clone(), x);
    }
    let rate = match field(v, "rate")? {
        Value::Null => None,
        r => Some(AsymptoticClass {
            exponent: float_field(r, "exponent")?.unwrap_or(f64::NAN),
            log_exponent: float_field(r, "log_exponent")?.unwrap_or(f64::NAN),
        }),
    };
    let notes = field(v, "notes")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("report notes must be an array".into()))?
        .iter()
        .map(|n| n.as_str().map(str::to_string))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidInput("report notes must be strings".into()))?;
    Ok(CriterionReport {
        criterion_id,
        parameters,
        verdict,
        quantity: float_field(v, "quantity")?,
        rate,
        label: string_field(v, "label")?,
        notes,
    })
}

pub fn reports_to_json(reports: &[CriterionReport]) -> String {
    to_string(&Value::Array(reports.iter().map(report_value).collect()))
}

pub fn reports_from_json(text: &str) -> Result<Vec<CriterionReport>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report JSON: {e}")))?;
    v.as_array()
        .ok_or_else(|| Error::InvalidInput("report document must be an array".into()))?
        .iter()
        .map(report_from_value)
        .collect()
}

pub fn check_value(c: &CheckReport) -> Value {
    object([
        ("name", Value::String(c.name.clone())),
        ("passed", Value::Bool(c.passed)),
        ("checked", Value::from(c.checked)),
        ("violations", Value::from(c.violations)),
        ("skipped", Value::from(c.skipped)),
        ("worst_at", opt_float(c.worst_at)),
        ("worst_lhs", float(c.worst_lhs)),
        ("worst_rhs", float(c.worst_rhs)),
        ("worst_ratio", float(c.worst_ratio)),
        ("fitted_constant", opt_float(c.fitted_constant)),
        ("notes", Value::Array(c.notes.iter().map(|n| Value::String(n.clone())).collect())),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(fmt_float(1.5), "1.500000000000e+00");
        assert_eq!(fmt_float(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(fmt_float(1e123), "1.000000000000e+123");
        assert_eq!(fmt_float(0.0), "0.000000000000e+00");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(parse_float("inf"), Some(f64::INFINITY));
        assert_eq!(parse_float("1.500000000000e+00"), Some(1.5));
    }

    #[test]
    fn keys_are_sorted_and_nonfinite_is_a_string() {
        let v = object([("b", float(1.0)), ("a", float(f64::INFINITY)), ("c", Value::from(3u32))]);
        assert_eq!(to_string(&v), "{\n  \"a\": \"inf\",\n  \"b\": 1.000000000000e+00,\n  \"c\": 3\n}\n");
        assert_eq!(to_string(&Value::Array(vec![])), "[]\n");
    }

    #[test]
    fn report_round_trip() {
        let mut parameters = BTreeMap::new();
        parameters.insert("p".to_string(), 2.0);
        parameters.insert("q".to_string(), f64::INFINITY);
        let r = CriterionReport {
            criterion_id: CriterionId::WpInt,
            parameters,
            verdict: Verdict::Holds,
            quantity: Some(1.0 / 3.0),
            rate: Some(AsymptoticClass {
                exponent: -0.5,
                log_exponent: 0.0,
            }),
            label: "nikodym".into(),
            notes: vec!["x".into()],
        };
        let text = reports_to_json(std::slice::from_ref(&r));
        let back = reports_from_json(&text).unwrap();
        assert_eq!(reports_to_json(&back), text);
        assert_eq!(back[0].parameters["q"], f64::INFINITY);
        assert!((back[0].quantity.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(reports_from_json("[]").unwrap().is_empty());
    }
}
