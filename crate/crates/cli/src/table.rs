//! Self-describing output tables.
//!
//! CSV: `# key,value` metadata lines, one header row, data rows.
//! JSON: one object with `schema`, `metadata`, `columns` and `rows`.
//! Reals are written with 17 significant digits in both formats.

use std::io::{self, Write};
use std::str::FromStr;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

pub const SCHEMA: &str = "invcorr-table/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
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

pub fn real17(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) => real17(*x),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) if x.is_finite() => Value::Number(Number::from_str(&real17(*x)).expect("formatted real parses")),
            Cell::Real(x) => Value::String(x.to_string()),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { metadata: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "# schema,{SCHEMA}")?;
                for (k, v) in &self.metadata {
                    writeln!(out, "# {k},{}", v.csv())?;
                }
                writeln!(out, "{}", self.columns.join(","))?;
                for r in &self.rows {
                    let line: Vec<String> = r.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", line.join(","))?;
                }
                Ok(())
            }
            Format::Json => {
                let mut meta = Map::new();
                for (k, v) in &self.metadata {
                    meta.insert(k.clone(), v.json());
                }
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let mut obj = Map::new();
                obj.insert("schema".into(), SCHEMA.into());
                obj.insert("metadata".into(), Value::Object(meta));
                obj.insert("columns".into(), self.columns.clone().into());
                obj.insert("rows".into(), Value::Array(rows));
                serde_json::to_writer_pretty(&mut *out, &Value::Object(obj))?;
                writeln!(out)
            }
        }
    }
}

/// Machine-readable error record, written as one JSON line.
pub fn error_record(kind: &str, message: &str, command: Option<&str>) -> String {
    let mut obj = Map::new();
    obj.insert("schema".into(), SCHEMA.into());
    obj.insert("error".into(), kind.into());
    obj.insert("message".into(), message.into());
    if let Some(c) = command {
        obj.insert("command".into(), c.into());
    }
    Value::Object(obj).to_string()
}
