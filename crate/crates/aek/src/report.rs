//! JSON report documents. Objects are `BTreeMap`s so key order is fixed;
//! rationals are written as `"p/q"` strings and floats as shortest
//! round-trip numbers.

use std::collections::BTreeMap;

use aek_core::invariants::{Center, Plane3, Quadric3};
use aek_core::{AffineMap3, Scalar};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub mode: String,
    /// The arguments that shaped the run.
    pub echo: BTreeMap<String, Value>,
    pub results: Value,
    pub diagnostics: Vec<String>,
    /// `true` when every check passed (verify) or at least one sample
    /// succeeded (evolute).
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are plain data");
        s.push('\n');
        s
    }
}

pub fn scalar(s: &Scalar) -> Value {
    match s {
        Scalar::Rational(_) => Value::String(s.to_string()),
        Scalar::Float(x) => float(*x),
    }
}

/// Non-finite floats become strings, since JSON has no literal for them.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(format!("{x}")), Value::Number)
}

pub fn vector(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar).collect())
}

pub fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| float(*x)).collect())
}

pub fn plane(p: &Plane3) -> Value {
    json!({ "normal": vector(p.normal()), "offset": scalar(p.offset()) })
}

pub fn quadric(q: &Quadric3) -> Value {
    Value::Array(q.matrix().iter().map(|row| vector(row)).collect())
}

pub fn center(c: &Center) -> Value {
    match c {
        Center::Finite(p) => json!({ "kind": "Finite", "point": vector(p) }),
        Center::AtInfinity(d) => json!({ "kind": "AtInfinity", "direction": vector(d) }),
    }
}

pub fn affine_map(m: &AffineMap3) -> Value {
    json!({
        "linear": Value::Array(m.linear().iter().map(|r| vector(r)).collect()),
        "translation": vector(m.translation()),
    })
}
