//! Reports and their JSON and CSV renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::job::Format;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub converged: bool,
    pub restarts_used: usize,
    /// Wall-clock time of the row; zero unless timing was requested.
    pub runtime_ms: u64,
    /// Command-specific details, JSON only.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// `None` for commands that do not depend on temperature.
    pub beta: Option<f64>,
    pub quantity: String,
    pub value: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    /// Channel the report refers to when it was generated rather than given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("report has no rows")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const CSV_HEADER: &str = "beta,quantity,value,converged,restarts_used,runtime_ms";

/// Twelve significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn round12(x: f64) -> f64 {
    if x.is_finite() {
        fmt_float(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Renders a report; floats carry 12 significant digits in both formats.
pub fn render(report: &Report, format: Format) -> Result<String, EmitError> {
    if report.rows.is_empty() {
        return Err(EmitError::Empty);
    }
    Ok(match format {
        Format::Json => {
            let mut v = serde_json::to_value(report).expect("report serializes");
            round_value(&mut v);
            let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &report.rows {
                let beta = r.beta.map(fmt_float).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{beta},{},{},{},{},{}",
                    r.quantity,
                    fmt_float(r.value),
                    r.diagnostics.converged,
                    r.diagnostics.restarts_used,
                    r.diagnostics.runtime_ms
                );
            }
            s
        }
    })
}

/// Writes a rendered report; a partially written file is removed on failure.
pub fn emit(report: &Report, format: Format, path: &Path) -> Result<(), EmitError> {
    let text = render(report, format)?;
    std::fs::write(path, text).map_err(|source| {
        let _ = std::fs::remove_file(path);
        EmitError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}
