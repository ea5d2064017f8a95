//! Canonical output: JSON with sorted keys and floats rounded to 12
//! significant digits, plus a flat `key: value` text rendering of the same
//! tree. Identical inputs and seeds must produce byte-identical output.

use serde_json::{Number, Value};

/// Round to 12 significant digits and reparse, so the emitted decimal is the
/// shortest representation of the rounded value.
fn canonical_f64(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("rounded float reparses")
}

pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                Value::Number(n)
            } else {
                let rounded = canonical_f64(n.as_f64().expect("finite JSON float"));
                Value::Number(Number::from_f64(rounded).expect("rounded float stays finite"))
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        // serde_json's default map is a BTreeMap, so keys come out sorted
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect())
        }
        other => other,
    }
}

pub fn to_json_line(value: &Value) -> String {
    let mut s = serde_json::to_string(value).expect("report serializes");
    s.push('\n');
    s
}

fn scalar_str(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(path: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(map) if map.is_empty() => {
            out.push_str(path);
            out.push_str(": {}\n");
        }
        Value::Object(map) => {
            for (key, v) in map {
                let sub = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                render(&sub, v, out);
            }
        }
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar_str).collect();
            out.push_str(&format!("{path}: [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                render(&format!("{path}[{i}]"), v, out);
            }
        }
        scalar => out.push_str(&format!("{path}: {}\n", scalar_str(scalar))),
    }
}

pub fn to_text(value: &Value) -> String {
    let mut out = String::new();
    render("", value, &mut out);
    out
}
