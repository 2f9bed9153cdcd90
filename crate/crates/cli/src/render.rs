//! JSON and text rendering. Integers become JSON numbers when they fit in an
//! `i64` and decimal strings otherwise; rationals are `"p/q"` strings.

use k3fm_core::discforms::DFElement;
use k3fm_core::lagrangians::LagrangianSubgroup;
use k3fm_core::{Int, Rational, RationalVector};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

pub fn int(x: &Int) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn rational(x: &Rational) -> Value {
    json!(x.to_string())
}

pub fn ints(xs: &[Int]) -> Value {
    Value::Array(xs.iter().map(int).collect())
}

pub fn element(x: &DFElement<Int>) -> Value {
    ints(&x.coords)
}

pub fn vector(v: &RationalVector) -> Value {
    Value::Array(v.coords.iter().map(rational).collect())
}

pub fn selector(l: &LagrangianSubgroup<Int>) -> Value {
    Value::Array(
        l.selector
            .iter()
            .map(|(p, c)| json!({ "p": int(p), "choice": c.to_string() }))
            .collect(),
    )
}

pub fn subgroup(l: &LagrangianSubgroup<Int>) -> Value {
    json!({ "selector": selector(l), "generator": element(&l.generator) })
}

/// Pretty JSON with a trailing newline; re-rendering parsed output is stable.
pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

pub fn coords(xs: &[Int]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

pub fn rationals(v: &RationalVector) -> String {
    let parts: Vec<String> = v.coords.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

pub fn selector_text(l: &LagrangianSubgroup<Int>) -> String {
    if l.selector.is_empty() {
        return "-".into();
    }
    let parts: Vec<String> = l.selector.iter().map(|(p, c)| format!("{p}:{c}")).collect();
    parts.join(" ")
}
