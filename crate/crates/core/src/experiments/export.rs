use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub description: String,
}

impl Column {
    pub fn new(name: &str, description: &str) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Debug formatting round-trips every f64 exactly.
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Cell::Int(_) => "integer",
            Cell::Float(_) => "float",
            Cell::Text(_) => "string",
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Numeric values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            code_version: CODE_VERSION.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub study: String,
    pub tables: Vec<Table>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

impl StudyResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Serialize)]
struct SchemaColumn<'a> {
    name: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    description: &'a str,
}

#[derive(Serialize)]
struct Schema<'a> {
    table: &'a str,
    schema_version: u32,
    columns: Vec<SchemaColumn<'a>>,
}

/// Contents of `manifest.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub study: String,
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub tables: Vec<String>,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_table(dir: &Path, t: &Table) -> Result<()> {
    let path = dir.join(format!("{}.csv", t.name));
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Numerical(format!("{}: {e}", path.display()));
    w.write_record(t.columns.iter().map(|c| c.name.as_str()))
        .map_err(csv_err)?;
    for row in &t.rows {
        if row.len() != t.columns.len() {
            return Err(Error::Dimension(format!(
                "table {} has {} columns but a row of {}",
                t.name,
                t.columns.len(),
                row.len()
            )));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    write(&path, &bytes)?;

    let kinds: Vec<&str> = match t.rows.first() {
        Some(r) => r.iter().map(Cell::kind).collect(),
        None => vec!["float"; t.columns.len()],
    };
    let schema = Schema {
        table: &t.name,
        schema_version: SCHEMA_VERSION,
        columns: t
            .columns
            .iter()
            .zip(kinds)
            .map(|(c, kind)| SchemaColumn {
                name: &c.name,
                kind,
                description: &c.description,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&schema).expect("schema serializes");
    json.push('\n');
    write(&dir.join(format!("{}.schema.json", t.name)), json.as_bytes())
}

/// Writes every table as CSV plus a JSON schema and a `manifest.toml`.
/// Output is a pure function of the result, so reruns are byte-identical.
pub fn write_study(result: &StudyResult, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for t in &result.tables {
        write_table(dir, t)?;
        files.push(dir.join(format!("{}.csv", t.name)));
        files.push(dir.join(format!("{}.schema.json", t.name)));
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        study: result.study.clone(),
        code_version: result.provenance.code_version.clone(),
        config_hash: result.provenance.config_hash.clone(),
        seed: result.provenance.seed,
        tables: result.tables.iter().map(|t| t.name.clone()).collect(),
        warnings: result.warnings.clone(),
        config: cfg.clone(),
    };
    let path = dir.join("manifest.toml");
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write(&path, text.as_bytes())?;
    files.push(path);
    Ok(files)
}

/// Counts of rows per table, for summaries.
pub fn row_counts(result: &StudyResult) -> BTreeMap<String, usize> {
    result
        .tables
        .iter()
        .map(|t| (t.name.clone(), t.rows.len()))
        .collect()
}
