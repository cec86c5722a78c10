use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::matcore::BlockMatrix;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub arguments: BTreeMap<String, String>,
    pub input_digest: String,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub verdict: String,
    pub exit_code: i32,
    pub results: Value,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

/// Rounds every number in the tree to [`SIGNIFICANT_DIGITS`].
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                *v = number(x);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn round(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// JSON number rounded to the report precision; non-finite values become
/// the strings `"inf"`, `"-inf"` and `"nan"`.
pub fn number(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        serde_json::Number::from_f64(round(x)).map(Value::Number).unwrap_or(Value::Null)
    }
}

pub fn matrix(m: &BlockMatrix) -> Value {
    Value::Array(
        m.blocks()
            .iter()
            .map(|b| {
                Value::Array(
                    (0..b.nrows())
                        .map(|i| {
                            Value::Array(
                                (0..b.ncols())
                                    .map(|j| Value::Array(vec![number(b[(i, j)].re), number(b[(i, j)].im)]))
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn object(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

impl Report {
    pub fn to_machine(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        round_value(&mut value);
        let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nclp {}: {}", self.command, self.verdict);
        let mut results = self.results.clone();
        round_value(&mut results);
        render(&mut out, &results, 0);
        let args: Vec<String> = self.arguments.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "arguments: {}", args.join(" "));
        let tols: Vec<String> = self.tolerances.iter().map(|(k, v)| format!("{k}={:e}", round(*v))).collect();
        let _ = writeln!(out, "tolerances: {}", tols.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        let _ = writeln!(out, "input sha256: {}", self.input_digest);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            Some(format!("[{}]", items.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match scalar(val) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(out, val, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render(out, item, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round(1.0 / 3.0), 0.333333333333);
        assert_eq!(round(1.1661903789690602), 1.16619037897);
        assert_eq!(number(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn machine_round_trip() {
        let r = Report {
            command: "norm".into(),
            arguments: BTreeMap::from([("p".to_string(), "2".to_string())]),
            input_digest: "00".into(),
            seed: Some(3),
            tolerances: BTreeMap::from([("gain".to_string(), 1e-10)]),
            verdict: "PASS".into(),
            exit_code: 0,
            results: object(vec![("norm", number(0.1 + 0.2))]),
            warnings: vec![],
            wall_time_ms: 1.5,
        };
        let text = r.to_machine();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.results["norm"], serde_json::json!(0.3));
        assert_eq!(back.to_machine(), text);
        assert!(r.to_human().contains("norm: 0.3"));
    }
}
