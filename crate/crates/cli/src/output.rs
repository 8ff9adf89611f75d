use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::args::Format;

/// A rectangular result with named columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// One row built from the scalar fields of a JSON object. Arrays are
    /// joined with `;`.
    pub fn from_object(value: &Value) -> Self {
        let obj = value.as_object().cloned().unwrap_or_default();
        Self {
            columns: obj.keys().cloned().collect(),
            rows: vec![obj.into_iter().map(|(_, v)| v).collect()],
        }
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
                .collect(),
        )
    }
}

/// Full double precision, 17 significant digits.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => v.to_string(),
    }
}

/// JSON number for a float; non-finite values become strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_table(table: &Table, format: Format, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(cell))?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &table.to_json())?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_value(value: &Value, format: Format, path: Option<&Path>) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = sink(path)?;
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
        Format::Csv => write_table(&Table::from_object(value), format, path),
    }
}

/// `run.csv` → `run.<suffix>.json`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.json"))
}

/// Writes a summary next to `out`, or to standard error without one.
pub fn write_sidecar(value: &Value, out: Option<&Path>, suffix: &str) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => {
            let path = sidecar_path(p, suffix);
            std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => eprintln!("{text}"),
    }
    Ok(())
}
