//! JSON and CSV emitters. Reports are deterministic: no timestamps, and
//! floats printed in shortest round-trip form.

use std::io::Write;
use std::path::Path;

use closurekit_core::numkernel::{c64, ComplexMatrix};
use serde_json::{json, Value};

use crate::config::OutputFormat;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "closurekit";

pub fn complex_json(z: c64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn provenance(config_sha256: Option<&str>, seed: u64) -> Value {
    json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_sha256,
        "seed": seed,
    })
}

/// A CSV table: one header row, complex numbers split into two columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Flattens a JSON object into `key,value` rows with dotted keys.
    pub fn from_json(value: &Value) -> Self {
        let mut t = Self::new(&["key", "value"]);
        flatten("", value, &mut t);
        t
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Usage(format!("csv encoding: {e}"));
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv encoding: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn flatten(prefix: &str, value: &Value, t: &mut Table) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, t);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, t);
            }
        }
        Value::String(s) => t.push(vec![prefix.to_string(), s.clone()]),
        other => t.push(vec![prefix.to_string(), other.to_string()]),
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A command report, renderable as JSON or CSV.
pub struct Report {
    pub json: Value,
    pub table: Table,
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> CliResult<String> {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values serialize");
                s.push('\n');
                Ok(s)
            }
            OutputFormat::Csv => self.table.to_csv(),
        }
    }
}

pub fn write_output(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}
