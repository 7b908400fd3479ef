use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mms_core::{Error, Result};
use schemars::JsonSchema;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
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
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(format!("CSV encoding failed: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, JsonSchema)]
pub struct Provenance {
    pub config_hash: String,
    pub library_version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_clock_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, JsonSchema)]
pub struct ExperimentReport {
    pub subcommand: String,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub notes: BTreeMap<String, String>,
    /// Table name → row count; rows go to `<name>.csv`.
    pub tables: BTreeMap<String, usize>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub table_data: BTreeMap<String, Table>,
    /// Additional output files by name.
    #[serde(skip)]
    pub files: BTreeMap<String, String>,
    /// Set when a computation finished without meeting its goal.
    #[serde(skip)]
    pub numerical_failure: Option<String>,
}

/// Accumulates the outputs of one run.
#[derive(Debug, Default)]
pub struct ReportBuilder {
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub notes: BTreeMap<String, String>,
    pub tables: BTreeMap<String, Table>,
    pub files: BTreeMap<String, String>,
    pub numerical_failure: Option<String>,
}

impl ReportBuilder {
    pub fn scalar(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.scalars.insert(name.into(), value);
        self
    }

    pub fn opt_scalar(&mut self, name: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(v) => self.scalar(name, v),
            None => self.flag(format!("{name}_indeterminate"), true),
        }
    }

    pub fn flag(&mut self, name: impl Into<String>, value: bool) -> &mut Self {
        self.flags.insert(name.into(), value);
        self
    }

    pub fn note(&mut self, name: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.notes.insert(name.into(), value.into());
        self
    }

    pub fn table(&mut self, name: impl Into<String>, table: Table) -> &mut Self {
        self.tables.insert(name.into(), table);
        self
    }

    /// Rejects any non-finite number, naming where it appeared.
    pub fn check_finite(&self, subcommand: &str) -> Result<()> {
        if let Some((k, _)) = self.scalars.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{subcommand}: scalar {k}")));
        }
        for (name, t) in &self.tables {
            for row in &t.rows {
                for (c, cell) in row.iter().enumerate() {
                    if matches!(cell, Cell::Num(v) if !v.is_finite()) {
                        return Err(Error::NonFinite(format!(
                            "{subcommand}: table {name}, column {}",
                            t.columns[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// SHA-256 of the compact JSON with sorted keys.
pub fn config_hash(raw: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(raw).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl ExperimentReport {
    pub fn summary_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
        text.push('\n');
        text
    }

    /// Writes `summary.json` and one CSV per table, returning the paths.
    /// Everything is encoded before the first file is created.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut files = vec![(dir.join("summary.json"), self.summary_json().into_bytes())];
        for (name, table) in &self.table_data {
            files.push((dir.join(format!("{name}.csv")), table.to_csv()?));
        }
        for (name, text) in &self.files {
            files.push((dir.join(name), text.clone().into_bytes()));
        }
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| Error::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (path, bytes) in &files {
            fs::write(path, bytes).map_err(io(path))?;
        }
        Ok(files.into_iter().map(|f| f.0).collect())
    }
}
