//! Tabular reports written as CSV or as JSON with the same columns.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

fn float_text(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    pub fn text(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float_text(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) if v.is_finite() => Value::from(*v),
            Cell::Float(v) => Value::from(float_text(*v)),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Report { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for report {}", self.name);
        self.rows.push(row);
    }

    /// Every row carries `valid = true`.
    pub fn valid(&self) -> bool {
        let Some(k) = self.columns.iter().position(|c| *c == "valid") else {
            return true;
        };
        self.rows.iter().all(|r| r[k] == Cell::Bool(true))
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({
                    "report": self.name,
                    "columns": self.columns,
                    "rows": rows,
                    "valid": self.valid(),
                });
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Column lists and field descriptions for every report.
pub const SCHEMA: &str = include_str!("../schema.json");

#[cfg(test)]
pub fn schema() -> Result<Map<String, Value>> {
    let v: Value = serde_json::from_str(SCHEMA)?;
    match v {
        Value::Object(m) => Ok(m),
        _ => anyhow::bail!("schema.json must hold an object"),
    }
}
