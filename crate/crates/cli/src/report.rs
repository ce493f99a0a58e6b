//! Report emission with a fixed textual form.
//!
//! Keys keep insertion order and every floating point number is printed
//! with 17 significant digits, so equal inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::Value;
use tractor_core::geometry::CURVATURE_CONVENTION;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty-printed JSON with fixed float formatting.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => {
            out.push_str(&serde_json::to_string(v).expect("scalar"))
        }
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => write!(out, "{u}").unwrap(),
            (None, Some(i)) => write!(out, "{i}").unwrap(),
            _ => out.push_str(&float(n.as_f64().expect("finite"))),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            // short numeric rows stay on one line
            if items.iter().all(|i| i.is_number()) && items.len() <= 16 {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, i, depth);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, i, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, val)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_value(out, val, depth + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

/// JSON value of anything serializable; non-finite floats become `null`.
pub fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report values serialize")
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| to_value(&r.iter().copied().collect::<Vec<f64>>()))
            .collect(),
    )
}

pub fn vector(v: &DVector<f64>) -> Value {
    to_value(&v.iter().copied().collect::<Vec<f64>>())
}

/// A report under construction: command name, curvature convention and the
/// resolved configuration come first.
pub struct Report {
    body: serde_json::Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let mut body = serde_json::Map::new();
        body.insert("command".into(), Value::String(command.into()));
        body.insert(
            "curvature_convention".into(),
            Value::String(CURVATURE_CONVENTION.into()),
        );
        body.insert("config".into(), to_value(config));
        Report { body }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.body.insert(key.into(), v.into());
        self
    }

    pub fn value(&self) -> Value {
        Value::Object(self.body.clone())
    }

    pub fn write(&self, dir: &Path, name: &str) -> CliResult<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, canonical_json(&self.value())).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes a CSV file whose numeric cells use the report float format.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
