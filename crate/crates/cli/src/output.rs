use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::CliError;

/// Formats `v` with 12 significant digits, independent of locale.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if (1e-5..1e12).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            Box::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

/// Header plus rows, already formatted.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: Box<dyn Write>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    /// Array of objects keyed by the header; numeric cells stay numbers.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self.rows.iter().map(|r| {
            let obj = self.header.iter().zip(r).map(|(k, v)| {
                let val = match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => serde_json::json!(x),
                    _ if v.is_empty() => serde_json::Value::Null,
                    _ => serde_json::json!(v),
                };
                (k.to_string(), val)
            });
            serde_json::Value::Object(obj.collect())
        });
        serde_json::Value::Array(rows.collect())
    }
}

pub fn write_json(out: Box<dyn Write>, value: &serde_json::Value) -> Result<(), CliError> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Io(e.to_string()))
}
