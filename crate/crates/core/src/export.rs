//! CSV and JSON serialization of kernels, trajectories and reports.
//!
//! Every document carries a metadata block (command, config, seed, library
//! version). CSV files put it in leading `# ` comment lines; JSON documents
//! in a `metadata` object. Floats use the shortest representation that
//! round-trips to the same double.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chains::RowStochasticMatrix;
use crate::rational::{parse_rational, to_f64, Rational};
use crate::{Error, Result, VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
}

impl Metadata {
    pub fn new(command: impl Into<String>, config: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            version: VERSION.to_string(),
        }
    }

    fn csv_header(&self) -> String {
        let mut out = format!("# command: {}\n", self.command);
        out += &format!("# config: {}\n", self.config);
        match self.seed {
            Some(s) => out += &format!("# seed: {s}\n"),
            None => out += "# seed: none\n",
        }
        out += &format!("# version: {}\n", self.version);
        out
    }
}

/// Shortest round-trip decimal form of a double.
pub fn format_float(x: f64) -> String {
    format!("{x}")
}

pub fn matrix_to_csv(matrix: &RowStochasticMatrix, meta: &Metadata) -> String {
    let mut out = meta.csv_header();
    for row in matrix.entries() {
        let line: Vec<String> = row.iter().map(|v| format_float(to_f64(v))).collect();
        out += &line.join(",");
        out.push('\n');
    }
    out
}

pub fn matrix_to_json(matrix: &RowStochasticMatrix, meta: &Metadata) -> Value {
    let rows: Vec<Vec<String>> = matrix
        .entries()
        .iter()
        .map(|row| row.iter().map(ToString::to_string).collect())
        .collect();
    json!({ "metadata": meta, "order": matrix.order(), "entries": rows })
}

/// Reads back the exact kernel from [`matrix_to_json`] output.
pub fn matrix_from_json(doc: &Value) -> Result<RowStochasticMatrix> {
    let rows = doc
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"entries\" array".into()))?;
    let entries = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse("row is not an array".into()))?
                .iter()
                .map(|cell| {
                    let text = cell
                        .as_str()
                        .ok_or_else(|| Error::Parse("entry is not a string".into()))?;
                    parse_exact(text)
                })
                .collect::<Result<Vec<Rational>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RowStochasticMatrix::new(entries)
}

/// Parses a `p/q` or integer string, refusing decimal forms.
pub fn parse_exact(text: &str) -> Result<Rational> {
    match parse_rational(text)? {
        (value, false) => Ok(value),
        (_, true) => Err(Error::Parse(format!("expected an exact rational, got {text:?}"))),
    }
}

/// `step,state` rows for `states[1..]`; `states[0]` is the start and goes
/// into the metadata by the caller.
pub fn trajectory_to_csv<T: std::fmt::Display>(states: &[T], meta: &Metadata) -> String {
    let mut out = meta.csv_header();
    out += "step,state\n";
    for (step, s) in states.iter().enumerate().skip(1) {
        out += &format!("{step},{s}\n");
    }
    out
}

pub fn float_trajectory_to_csv(states: &[f64], meta: &Metadata) -> String {
    let formatted: Vec<String> = states.iter().map(|&x| format_float(x)).collect();
    trajectory_to_csv(&formatted, meta)
}

/// `state,count,frequency` rows.
pub fn histogram_to_csv(counts: &[u64], meta: &Metadata) -> String {
    let total: u64 = counts.iter().sum();
    let mut out = meta.csv_header();
    out += "state,count,frequency\n";
    for (state, &c) in counts.iter().enumerate() {
        let freq = if total == 0 { 0.0 } else { c as f64 / total as f64 };
        out += &format!("{state},{c},{}\n", format_float(freq));
    }
    out
}

/// Generic table with a header row.
pub fn table_to_csv(header: &[&str], rows: &[Vec<String>], meta: &Metadata) -> String {
    let mut out = meta.csv_header();
    out += &header.join(",");
    out.push('\n');
    for row in rows {
        out += &row.join(",");
        out.push('\n');
    }
    out
}

/// Wraps a report body together with its metadata.
pub fn report_to_json(body: Value, meta: &Metadata) -> Value {
    json!({ "metadata": meta, "report": body })
}
