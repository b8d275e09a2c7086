//! File helpers: path-aware error context and atomic writes
//! (write-temp-then-rename, so interrupted runs never leave half files).

use std::fs;
use std::path::Path;

use crate::errors::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Round every number in a JSON document to 12 significant digits, so
/// artifacts diff cleanly across runs.
pub fn round_json_floats(value: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return serde_json::Number::from_f64(tdec_core::util::round_sig12(f))
                        .map(Value::Number)
                        .unwrap_or(Value::Number(n));
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json_floats).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_json_floats(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Pretty-print a JSON value with all floats rounded to 12 significant
/// digits and a trailing newline.
pub fn json_artifact(value: serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(&round_json_floats(value)).expect("valid JSON");
    text.push('\n');
    text
}
