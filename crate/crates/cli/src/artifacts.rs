//! Artifact bundles: `results.csv`, `summary.json` (with a git-style
//! content hash of the CSV) and an optional `rate.svg`.
//!
//! Every summary is validated against the shipped schema before it is
//! written; the validator interprets the subset of JSON Schema the
//! shipped file uses (`type`, `required`, `properties`).

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::hash::git_blob_sha256;
use crate::CliError;

pub const SUMMARY_SCHEMA: &str = include_str!("../schema/summary.schema.json");

#[derive(Debug)]
pub struct Bundle {
    pub dir: PathBuf,
    pub results_csv: PathBuf,
    pub summary_json: PathBuf,
    pub chart_svg: Option<PathBuf>,
}

/// Assemble and write one bundle directory.
#[allow(clippy::too_many_arguments)]
pub fn write_bundle(
    dir: &Path,
    kind: &str,
    config_echo: Value,
    results_csv: String,
    fit: Value,
    oracle: Value,
    metrics: Value,
    chart: Option<String>,
) -> Result<Bundle, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Numeric(format!("cannot create `{}`: {e}", dir.display())))?;

    let csv_path = dir.join("results.csv");
    std::fs::write(&csv_path, &results_csv)
        .map_err(|e| CliError::Numeric(format!("cannot write results.csv: {e}")))?;

    let chart_path = match &chart {
        Some(svg) => {
            let p = dir.join("rate.svg");
            std::fs::write(&p, svg)
                .map_err(|e| CliError::Numeric(format!("cannot write rate.svg: {e}")))?;
            Some(p)
        }
        None => None,
    };

    let summary = serde_json::json!({
        "tool": {
            "name": "nuelab",
            "version": env!("CARGO_PKG_VERSION"),
        },
        "experiment": kind,
        "config": config_echo,
        "results_hash": format!("sha256:{}", git_blob_sha256(results_csv.as_bytes())),
        "outputs": {
            "results_csv": "results.csv",
            "chart_svg": chart.as_ref().map(|_| "rate.svg"),
        },
        "fit": fit,
        "oracle": oracle,
        "metrics": metrics,
    });
    validate_summary(&summary).map_err(CliError::Numeric)?;

    let summary_path = dir.join("summary.json");
    let pretty = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Numeric(format!("summary serialization failed: {e}")))?;
    std::fs::write(&summary_path, pretty + "\n")
        .map_err(|e| CliError::Numeric(format!("cannot write summary.json: {e}")))?;

    Ok(Bundle {
        dir: dir.to_path_buf(),
        results_csv: csv_path,
        summary_json: summary_path,
        chart_svg: chart_path,
    })
}

/// Check a summary value against the shipped schema subset.
pub fn validate_summary(summary: &Value) -> Result<(), String> {
    let schema: Value =
        serde_json::from_str(SUMMARY_SCHEMA).map_err(|e| format!("schema is unreadable: {e}"))?;
    check_node(summary, &schema, "$")
}

fn check_node(value: &Value, schema: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type") {
        let allowed: Vec<String> = match ty {
            Value::String(s) => vec![s.clone()],
            Value::Array(a) => a
                .iter()
                .filter_map(|v| v.as_str().map(str::to_string))
                .collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) => {
                if n.is_i64() || n.is_u64() {
                    "integer"
                } else {
                    "number"
                }
            }
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let matches = allowed
            .iter()
            .any(|a| a == actual || (a == "number" && actual == "integer"));
        if !matches {
            return Err(format!("{path}: expected {allowed:?}, found {actual}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if value.get(key).is_none() {
                return Err(format!("{path}: missing required key `{key}`"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (
        schema.get("properties").and_then(Value::as_object),
        value.as_object(),
    ) {
        for (key, sub) in props {
            if let Some(v) = obj.get(key) {
                check_node(v, sub, &format!("{path}.{key}"))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_summary_passes() {
        let s = serde_json::json!({
            "tool": {"name": "nuelab", "version": "0.1.0"},
            "experiment": "deviate",
            "config": {},
            "results_hash": "sha256:abc",
            "outputs": {"results_csv": "results.csv", "chart_svg": null},
            "fit": null,
            "oracle": null,
            "metrics": {},
        });
        assert!(validate_summary(&s).is_ok());
    }

    #[test]
    fn missing_key_fails() {
        let s = serde_json::json!({
            "tool": {"name": "nuelab", "version": "0.1.0"},
            "experiment": "deviate",
        });
        let err = validate_summary(&s).unwrap_err();
        assert!(err.contains("missing required key"));
    }

    #[test]
    fn wrong_type_fails() {
        let s = serde_json::json!({
            "tool": {"name": "nuelab", "version": "0.1.0"},
            "experiment": 42,
            "config": {},
            "results_hash": "sha256:abc",
            "outputs": {"results_csv": "results.csv"},
            "metrics": {},
        });
        let err = validate_summary(&s).unwrap_err();
        assert!(err.contains("expected"));
    }
}
