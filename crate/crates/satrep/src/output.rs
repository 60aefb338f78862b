//! Tables and their CSV / JSON encodings.
//!
//! CSV files start with `#`-prefixed `key: value` metadata lines followed by
//! a header row. Floats are written with 17 significant digits, so repeated
//! runs with the same configuration produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::CliError;

pub const TOOL_VERSION: &str = concat!("satrep ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>, E> From<Result<T, E>> for Cell {
    fn from(x: Result<T, E>) -> Self {
        x.map_or(Cell::Missing, Into::into)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra metadata lines, in order.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Table {
            name: name.into(),
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float values of one column, `None` for missing cells.
    pub fn floats(&self, name: &str) -> Vec<Option<f64>> {
        let i = self
            .column(name)
            .unwrap_or_else(|| panic!("no column {name} in {}", self.name));
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Float(x) => Some(x),
                Cell::Int(n) => Some(n as f64),
                _ => None,
            })
            .collect()
    }
}

/// Run-level metadata shared by every table of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Metadata {
    fn lines<'a>(&'a self, table: &'a Table) -> Vec<(&'a str, String)> {
        let mut out = vec![
            ("tool", TOOL_VERSION.to_string()),
            ("command", self.command.clone()),
            ("config_sha256", self.config_hash.clone()),
            ("seed", self.seed.to_string()),
        ];
        out.extend(table.notes.iter().map(|(k, v)| (k.as_str(), v.clone())));
        out
    }
}

pub fn to_csv(table: &Table, meta: &Metadata) -> Result<Vec<u8>, csv::Error> {
    let mut buf = Vec::new();
    for (k, v) in meta.lines(table) {
        writeln!(buf, "# {k}: {v}")?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn to_json(table: &Table, meta: &Metadata) -> Value {
    let mut m = Map::new();
    for (k, v) in meta.lines(table) {
        m.insert(k.to_string(), Value::String(v));
    }
    json!({
        "metadata": m,
        "columns": table.columns,
        "rows": table.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| io_error(path, e))
}

/// Writes `table` into `dir` in the requested formats; returns the paths.
pub fn emit(table: &Table, meta: &Metadata, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    if !dir.is_dir() {
        return Err(io_error(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        ));
    }
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{}.csv", table.name));
        let bytes = to_csv(table, meta).map_err(|e| io_error(&path, std::io::Error::other(e)))?;
        write_file(&path, &bytes)?;
        written.push(path);
    }
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{}.json", table.name));
        let mut bytes = serde_json::to_vec_pretty(&to_json(table, meta)).expect("json encodes");
        bytes.push(b'\n');
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
