//! Shared helpers for the integration and acceptance suites: running the
//! built binary, validating reports against the shipped schemas, and the
//! deterministic synthetic gauge fixture.

#![allow(dead_code)]

use arrisk::{simulate_ar, ARModel, InnovationScenario};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn run_arrisk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arrisk"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{} is not JSON: {e}", path.display()))
}

pub fn load_schema(name: &str) -> Value {
    read_json(&manifest_path(&format!("schemas/{name}")))
}

/// Validates a value against the subset of JSON Schema the shipped schemas
/// use: type, const, enum, required, properties, additionalProperties=false,
/// items, minItems, minimum.
pub fn validate_schema(schema: &Value, value: &Value) -> Result<(), String> {
    validate_at(schema, value, "$")
}

fn validate_at(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let obj = schema
        .as_object()
        .ok_or_else(|| format!("{path}: schema node is not an object"))?;

    if let Some(expected) = obj.get("const") {
        if value != expected {
            return Err(format!("{path}: expected const {expected}, got {value}"));
        }
    }
    if let Some(options) = obj.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in enum {options:?}"));
        }
    }
    if let Some(ty) = obj.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            "boolean" => value.is_boolean(),
            other => return Err(format!("{path}: unsupported schema type {other:?}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {value}"));
        }
    }
    if let Some(minimum) = obj.get("minimum").and_then(Value::as_f64) {
        let v = value
            .as_f64()
            .ok_or_else(|| format!("{path}: minimum applies to numbers"))?;
        if v < minimum {
            return Err(format!("{path}: {v} below minimum {minimum}"));
        }
    }
    if let Some(map) = value.as_object() {
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for key in required {
                let key = key.as_str().expect("required lists strings");
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required key {key:?}"));
                }
            }
        }
        let props = obj.get("properties").and_then(Value::as_object);
        if let Some(props) = props {
            for (key, sub) in map {
                match props.get(key) {
                    Some(subschema) => {
                        validate_at(subschema, sub, &format!("{path}.{key}"))?;
                    }
                    None => {
                        if obj.get("additionalProperties") == Some(&Value::Bool(false)) {
                            return Err(format!("{path}: unexpected key {key:?}"));
                        }
                    }
                }
            }
        }
    }
    if let Some(items) = value.as_array() {
        if let Some(min_items) = obj.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min_items {
                return Err(format!(
                    "{path}: {} items, needs at least {min_items}",
                    items.len()
                ));
            }
        }
        if let Some(item_schema) = obj.get("items") {
            for (i, item) in items.iter().enumerate() {
                validate_at(item_schema, item, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

// --- synthetic gauge fixture ------------------------------------------------

pub const GAUGE_PHI: f64 = 0.87;
pub const GAUGE_SCALE: f64 = 0.2;
pub const GAUGE_LEVEL: f64 = 2.0;
pub const GAUGE_SEED: u64 = 90210;
pub const GAUGE_DAYS: usize = 1200;
/// Rows whose value cell is left empty.
pub const GAUGE_MISSING: [usize; 3] = [200, 601, 1002];
/// Days absent from the file entirely.
pub const GAUGE_DROPPED: [usize; 2] = [400, 803];

/// Daily gauge CSV: levels follow an AR(1) around `GAUGE_LEVEL` on the
/// log(1+QD) scale, so re-ingesting recovers the autoregression exactly.
/// Gaps of both kinds (empty cells, skipped days) are injected.
pub fn synthetic_gauge_csv() -> String {
    let z: Vec<f64> = InnovationScenario::Normal
        .sample(GAUGE_DAYS + 300, GAUGE_SEED)
        .iter()
        .map(|v| GAUGE_SCALE * v)
        .collect();
    let model = ARModel::new(vec![GAUGE_PHI])
        .unwrap()
        .with_intercept(GAUGE_LEVEL * (1.0 - GAUGE_PHI))
        .unwrap();
    let series = simulate_ar(&model, &z, GAUGE_DAYS, 300).unwrap();

    let start = chrono::NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    let mut out = String::from("date,QD\n");
    for (i, y) in series.values().iter().enumerate() {
        if GAUGE_DROPPED.contains(&i) {
            continue;
        }
        let date = start + chrono::Days::new(i as u64);
        if GAUGE_MISSING.contains(&i) {
            out.push_str(&format!("{date},\n"));
            continue;
        }
        let qd = y.exp() - 1.0;
        assert!(qd >= 0.0, "fixture seed keeps levels positive");
        out.push_str(&format!("{date},{qd:.6}\n"));
    }
    out
}

pub fn gauge_fixture_path() -> PathBuf {
    manifest_path("tests/data/synthetic_gauge.csv")
}
