//! Canonical JSON rendering.
//!
//! Reports are split into a header (wall-clock time, runtimes, version) and a
//! body that depends only on the configuration and seed. The body is rendered
//! with sorted keys and every float printed with 17 significant digits, so two
//! runs with equal inputs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// `serialize_with` helper: finite values as numbers, others as the strings
/// `"inf"`, `"-inf"` and `"nan"` (serde_json would write `null`).
pub fn ser_f64<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// `{:.16e}` for finite values; `"inf"`, `"-inf"` or `"nan"` (as strings) otherwise.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"nan\"".to_string()
    } else if x > 0.0 {
        "\"inf\"".to_string()
    } else {
        "\"-inf\"".to_string()
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            // short arrays of scalars stay on one line
            if a.len() <= 16 && a.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (k, x) in a.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    render(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                render(x, indent + 1, out);
                out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                render(x, indent + 1, out);
                out.push_str(if k + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Canonical text of a JSON value (keys sorted, floats with 17 digits).
pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    render(v, 0, &mut s);
    s
}

/// Serializes `body` and renders it canonically.
pub fn body_text<T: Serialize>(body: &T) -> Result<String> {
    let v = serde_json::to_value(body).map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
    Ok(canonical_json(&v))
}

/// `{"header": ..., "body": ...}` with the body text embedded verbatim.
pub fn document(header: &Value, body: &str) -> String {
    let mut out = String::from("{\n  \"header\": ");
    let h = canonical_json(header).replace('\n', "\n  ");
    out.push_str(&h);
    out.push_str(",\n  \"body\": ");
    out.push_str(&body.replace('\n', "\n  "));
    out.push_str("\n}\n");
    out
}

/// Body of a document produced by [`document`], re-rendered canonically.
pub fn extract_body(doc: &str) -> Result<String> {
    let v: Value = serde_json::from_str(doc).map_err(|e| Error::Parse(e.to_string()))?;
    let b = v
        .get("body")
        .ok_or_else(|| Error::Parse("document has no body".into()))?;
    Ok(canonical_json(b))
}
