//! Validates every JSON output of the binary against the schema files
//! shipped under `schemas/`.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qutrit-bell"))
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Minimal JSON Schema checker covering the subset the shipped schemas use:
/// `type` (string or list), `required`, `properties`, `items`.
fn validate(value: &Value, schema: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(expected) = schema.get("type") {
        let names: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(list) => list.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        // JSON Schema counts integers as numbers; serde keeps them unified.
        if !names.contains(&actual) && !(actual == "number" && names.contains(&"integer")) {
            errors.push(format!("{path}: expected type {names:?}, got {actual}"));
            return;
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if value.get(key).is_none() {
                errors.push(format!("{path}: missing required field '{key}'"));
            }
        }
    }
    if let Some(properties) = schema.get("properties").and_then(Value::as_object) {
        for (key, sub) in properties {
            if let Some(inner) = value.get(key) {
                validate(inner, sub, &format!("{path}.{key}"), errors);
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(list) = value.as_array() {
            for (i, inner) in list.iter().enumerate() {
                validate(inner, items, &format!("{path}[{i}]"), errors);
            }
        }
    }
}

fn assert_valid(value: &Value, schema_name: &str) {
    let mut errors = Vec::new();
    validate(value, &schema(schema_name), "$", &mut errors);
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn run_json(args: &[&str]) -> Value {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("valid JSON on stdout")
}

#[test]
fn optimize_output_matches_schema() {
    let payload = run_json(&[
        "optimize",
        "--inequality",
        "gwi-eq3",
        "--observables",
        "spin",
        "--state",
        "isotropic",
        "--restarts",
        "6",
        "--format",
        "json",
    ]);
    assert_valid(&payload, "optimize.schema.json");
}

#[test]
fn threshold_output_matches_schema() {
    let payload = run_json(&[
        "threshold",
        "--inequality",
        "cglmp",
        "--observables",
        "spin",
        "--state",
        "singlet",
        "--restarts",
        "6",
        "--format",
        "json",
    ]);
    assert_valid(&payload, "threshold.schema.json");
}

#[test]
fn global_max_output_matches_schema() {
    let payload = run_json(&[
        "global-max",
        "--inequality",
        "cglmp",
        "--observables",
        "spin",
        "--restarts",
        "2",
        "--format",
        "json",
    ]);
    assert_valid(&payload, "global-max.schema.json");
}

#[test]
fn lhv_and_reducibility_outputs_match_schemas() {
    let payload = run_json(&["lhv-check", "--inequality", "gwi-eq3", "--format", "json"]);
    assert_valid(&payload, "lhv-check.schema.json");

    let payload = run_json(&["reducibility", "--inequality", "cglmp", "--format", "json"]);
    assert_valid(&payload, "reducibility.schema.json");
}

#[test]
fn sweep_artifacts_match_schemas() {
    let dir: PathBuf =
        std::env::temp_dir().join(format!("qutrit-bell-schema-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let output = bin()
        .args([
            "sweep",
            "--family",
            "rho4",
            "--q",
            "0.3",
            "--observables",
            "spin",
            "--grid-points",
            "3",
            "--restarts",
            "2",
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );

    let sidecar: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("sweep_rho4_spin_q0.3.json")).unwrap(),
    )
    .unwrap();
    assert_valid(&sidecar, "sweep-series.schema.json");

    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("sweep_rho4_spin_q0.3.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_valid(&manifest, "manifest.schema.json");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn inequality_spec_json_matches_schema() {
    // The library's own serialization of a shipped spec must satisfy the
    // custom-spec input schema.
    let spec = qutrit_bell::inequalities::cglmp();
    let value = serde_json::to_value(&spec).unwrap();
    assert_valid(&value, "inequality-spec.schema.json");
}
