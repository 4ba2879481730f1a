//! Output files, table serialization and stderr diagnostics.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::failure::{CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Empty => Value::Null,
        }
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self, format: Format) -> CmdResult<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).map_err(Failure::data)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text)).map_err(Failure::data)?;
                }
                w.into_inner().map_err(|e| Failure::data(e.into_error()))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(h, c)| (h.to_string(), c.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut bytes = serde_json::to_vec_pretty(&rows).map_err(Failure::data)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

/// Files written under the output directory, in write order.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> CmdResult<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::data(anyhow::anyhow!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CmdResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Failure::data(anyhow::anyhow!("cannot write {}: {e}", path.display())))?;
        self.written.push(PathBuf::from(name));
        Ok(path)
    }

    /// Writes `<stem>.csv` or `<stem>.json`.
    pub fn table(&mut self, stem: &str, table: &Table, format: Format) -> CmdResult<PathBuf> {
        let bytes = table.to_bytes(format)?;
        self.write_bytes(&format!("{stem}.{}", format.extension()), &bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CmdResult<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(Failure::data)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }
}

/// One JSON object per line on stderr.
pub fn diagnostic(event: &str, fields: Value) {
    let mut obj = Map::new();
    obj.insert("event".into(), Value::String(event.into()));
    if let Value::Object(extra) = fields {
        obj.extend(extra);
    }
    eprintln!("{}", Value::Object(obj));
}
