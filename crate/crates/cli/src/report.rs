//! Report records and their JSON and CSV serializations.
//!
//! Every float is written in scientific notation with 17 significant
//! digits, so it parses back to the same `f64`. Non-finite values become
//! JSON `null` and empty CSV cells.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::config::{Command, Format};
use crate::CliError;

pub fn num(x: f64) -> Value {
    // Drop the sign of negative zero.
    let x = if x == 0.0 { 0.0 } else { x };
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

/// One output row. Keys keep insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Map<String, Value>);

impl Record {
    pub fn new() -> Self {
        Record(Map::new())
    }

    pub fn put(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.to_owned(), v.into());
        self
    }

    pub fn num(self, key: &str, x: f64) -> Self {
        self.put(key, num(x))
    }

    pub fn opt_num(self, key: &str, x: Option<f64>) -> Self {
        self.put(key, x.map_or(Value::Null, num))
    }

    pub fn nums(self, key: &str, xs: &[f64]) -> Self {
        self.put(key, Value::Array(xs.iter().map(|&x| num(x)).collect()))
    }

    /// Values keyed by name, e.g. coefficients by predictor.
    pub fn named(self, key: &str, names: &[String], xs: &[f64]) -> Self {
        let m: Map<String, Value> = names.iter().cloned().zip(xs.iter().map(|&x| num(x))).collect();
        self.put(key, Value::Object(m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub records: Vec<Record>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.name().into()));
        top.insert("records".into(), Value::Array(self.records.iter().map(|r| Value::Object(r.0.clone())).collect()));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("values serialize");
        s.push('\n');
        s
    }

    /// Nested objects and arrays are flattened into `key.name` and `key.i`
    /// columns (1-based); the header is the union of keys in order of first
    /// appearance.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let flat: Vec<Vec<(String, String)>> = self
            .records
            .iter()
            .map(|r| {
                let mut out = Vec::new();
                for (k, v) in &r.0 {
                    flatten(k, v, &mut out);
                }
                out
            })
            .collect();
        let mut columns: Vec<String> = Vec::new();
        for row in &flat {
            for (k, _) in row {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&columns).map_err(io)?;
        for row in &flat {
            let cells = columns.iter().map(|c| row.iter().find(|(k, _)| k == c).map_or("", |(_, v)| v.as_str()));
            w.write_record(cells).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes to `out`, or to stdout when `None`.
    pub fn write(&self, out: Option<&Path>, format: Format) -> Result<(), CliError> {
        let text = self.render(format)?;
        match out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
        }
    }
}

fn flatten(key: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{key}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{key}.{}", i + 1), x, out);
            }
        }
        Value::Null => out.push((key.to_owned(), String::new())),
        Value::String(s) => out.push((key.to_owned(), s.clone())),
        other => out.push((key.to_owned(), other.to_string())),
    }
}
