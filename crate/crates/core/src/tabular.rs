//! Table data model, delimited-file ingestion, table-type recognition and
//! key-value to entity-instance transposition.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typing::ColumnType;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("malformed table file {path}: {reason}")]
    MalformedFile { path: String, reason: String },
    #[error("invalid table: {0}")]
    Invalid(String),
    #[error("table {0} is not a key-value table")]
    NotKeyValue(String),
    #[error("key-value table {table} repeats key {key:?}")]
    DuplicateKeys { table: String, key: String },
    #[error("table-type model is untrained")]
    UntrainedModel,
    #[error("no labeled tables to train on")]
    NoTrainingData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableKind {
    EntityInstance,
    KeyValue,
    Unknown,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::EntityInstance => "entity-instance",
            TableKind::KeyValue => "key-value",
            TableKind::Unknown => "unknown",
        })
    }
}

impl FromStr for TableKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entity-instance" | "entityinstance" | "ei" => Ok(TableKind::EntityInstance),
            "key-value" | "keyvalue" | "kv" => Ok(TableKind::KeyValue),
            "unknown" => Ok(TableKind::Unknown),
            other => Err(format!("unknown table kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Tsv,
}

impl TableFormat {
    pub fn from_path(path: &Path) -> Option<TableFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(TableFormat::Csv),
            "tsv" | "tab" => Some(TableFormat::Tsv),
            _ => None,
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }
}

/// A rectangular grid of string cells under a header row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    id: String,
    name: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    kind: TableKind,
    column_types: Option<Vec<ColumnType>>,
}

impl Table {
    pub fn new(
        id: impl Into<String>,
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
    ) -> Result<Table, TableError> {
        let id = id.into();
        if headers.is_empty() {
            return Err(TableError::Invalid(format!("table {id} has no columns")));
        }
        if let Some((i, row)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != headers.len())
        {
            return Err(TableError::Invalid(format!(
                "table {id} row {i} has {} cells, expected {}",
                row.len(),
                headers.len()
            )));
        }
        Ok(Table {
            name: id.clone(),
            id,
            headers,
            rows,
            kind: TableKind::Unknown,
            column_types: None,
        })
    }

    pub fn with_kind(mut self, kind: TableKind) -> Table {
        self.kind = kind;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Table {
        self.name = name.into();
        self
    }

    /// Attaches per-column type annotations; the length must match the width.
    pub fn with_column_types(mut self, types: Vec<ColumnType>) -> Result<Table, TableError> {
        if types.len() != self.headers.len() {
            return Err(TableError::Invalid(format!(
                "{} column types for {} columns",
                types.len(),
                self.headers.len()
            )));
        }
        self.column_types = Some(types);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn column_types(&self) -> Option<&[ColumnType]> {
        self.column_types.as_deref()
    }

    pub fn n_columns(&self) -> usize {
        self.headers.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&str> {
        self.rows.get(row)?.get(col).map(String::as_str)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |r| r[col].as_str())
    }

    /// Case-insensitive header lookup.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name).or_else(|| {
            self.headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
        })
    }
}

/// Reads a delimited file whose first record is the header row.
pub fn load_table(path: &Path, format: TableFormat) -> Result<Table, TableError> {
    let malformed = |reason: String| TableError::MalformedFile {
        path: path.display().to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| malformed(e.to_string()))?;

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let mut records = records.into_iter();
    let headers = records
        .next()
        .ok_or_else(|| malformed("empty file".into()))?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(malformed("zero columns".into()));
    }
    let rows: Vec<Vec<String>> = records.collect();
    if let Some((i, r)) = rows
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != headers.len())
    {
        return Err(malformed(format!(
            "record {} has {} fields, header has {}",
            i + 2,
            r.len(),
            headers.len()
        )));
    }
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    Table::new(id, headers, rows)
}

/// Writes a table back out as delimited text (header row first).
pub fn write_table(table: &Table, path: &Path, format: TableFormat) -> Result<(), TableError> {
    let io = |e: csv::Error| TableError::MalformedFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_path(path)
        .map_err(io)?;
    w.write_record(table.headers()).map_err(io)?;
    for row in table.rows() {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| io(e.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableTypeFeatures {
    pub n_columns: usize,
    pub n_columns_sans_url: usize,
    pub has_key_or_property_header: bool,
    pub norm_word_len_variance: f64,
    pub norm_digit_presence_variance: f64,
}

impl TableTypeFeatures {
    pub fn to_vec(&self) -> [f64; 5] {
        [
            self.n_columns as f64,
            self.n_columns_sans_url as f64,
            f64::from(u8::from(self.has_key_or_property_header)),
            self.norm_word_len_variance,
            self.norm_digit_presence_variance,
        ]
    }
}

fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

fn is_url_column<'a>(cells: impl Iterator<Item = &'a str>) -> bool {
    let mut non_empty = 0;
    for c in cells.filter(|c| !c.trim().is_empty()) {
        if !c.to_ascii_lowercase().contains("http") {
            return false;
        }
        non_empty += 1;
    }
    non_empty > 0
}

pub fn extract_table_type_features(t: &Table) -> TableTypeFeatures {
    let n_columns = t.n_columns();
    let url_cols = (0..n_columns)
        .filter(|&c| is_url_column(t.column(c)))
        .count();
    let has_key = t.headers().iter().any(|h| {
        let h = h.to_lowercase();
        h.contains("key") || h.contains("property")
    });

    let mut len_var = 0.0;
    let mut digit_var = 0.0;
    for c in 0..n_columns {
        let counts: Vec<f64> = t
            .column(c)
            .map(|cell| cell.split_whitespace().count() as f64)
            .collect();
        let max = counts.iter().cloned().fold(0.0, f64::max);
        let normalized: Vec<f64> = if max > 0.0 {
            counts.iter().map(|x| x / max).collect()
        } else {
            vec![0.0; counts.len()]
        };
        len_var += population_variance(&normalized);

        let digits: Vec<f64> = t
            .column(c)
            .map(|cell| f64::from(u8::from(cell.chars().any(|ch| ch.is_ascii_digit()))))
            .collect();
        digit_var += population_variance(&digits);
    }

    TableTypeFeatures {
        n_columns,
        n_columns_sans_url: n_columns - url_cols,
        has_key_or_property_header: has_key,
        norm_word_len_variance: len_var / n_columns as f64,
        norm_digit_presence_variance: digit_var / n_columns as f64,
    }
}

/// Logistic regression over standardized [`TableTypeFeatures`].
///
/// A positive logit means key-value; zero or negative means entity-instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableTypeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl TableTypeModel {
    pub fn untrained() -> TableTypeModel {
        TableTypeModel {
            weights: Vec::new(),
            bias: 0.0,
            mean: Vec::new(),
            scale: Vec::new(),
        }
    }

    pub fn zeroed() -> TableTypeModel {
        TableTypeModel {
            weights: vec![0.0; 5],
            bias: 0.0,
            mean: vec![0.0; 5],
            scale: vec![1.0; 5],
        }
    }

    fn is_trained(&self) -> bool {
        self.weights.len() == 5 && self.mean.len() == 5 && self.scale.len() == 5
    }

    pub fn logit(&self, f: &TableTypeFeatures) -> Result<f64, TableError> {
        if !self.is_trained() {
            return Err(TableError::UntrainedModel);
        }
        let x = f.to_vec();
        Ok(self.bias
            + (0..5)
                .map(|i| self.weights[i] * (x[i] - self.mean[i]) / self.scale[i])
                .sum::<f64>())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.5,
            iterations: 3000,
            l2: 1e-3,
        }
    }
}

/// Full-batch gradient descent on the logistic loss; deterministic.
pub fn train_table_type(
    data: &[(TableTypeFeatures, TableKind)],
    cfg: LogisticConfig,
) -> Result<TableTypeModel, TableError> {
    let data: Vec<([f64; 5], f64)> = data
        .iter()
        .filter_map(|(f, k)| match k {
            TableKind::KeyValue => Some((f.to_vec(), 1.0)),
            TableKind::EntityInstance => Some((f.to_vec(), 0.0)),
            TableKind::Unknown => None,
        })
        .collect();
    if data.is_empty() {
        return Err(TableError::NoTrainingData);
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; 5];
    let mut scale = vec![0.0; 5];
    for i in 0..5 {
        mean[i] = data.iter().map(|(x, _)| x[i]).sum::<f64>() / n;
        let var = data
            .iter()
            .map(|(x, _)| (x[i] - mean[i]).powi(2))
            .sum::<f64>()
            / n;
        scale[i] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let xs: Vec<([f64; 5], f64)> = data
        .iter()
        .map(|(x, y)| {
            let mut z = [0.0; 5];
            for i in 0..5 {
                z[i] = (x[i] - mean[i]) / scale[i];
            }
            (z, *y)
        })
        .collect();

    let mut w = [0.0; 5];
    let mut b = 0.0;
    for _ in 0..cfg.iterations {
        let mut gw = [0.0; 5];
        let mut gb = 0.0;
        for (x, y) in &xs {
            let z = b + (0..5).map(|i| w[i] * x[i]).sum::<f64>();
            let p = 1.0 / (1.0 + (-z).exp());
            let err = p - y;
            for i in 0..5 {
                gw[i] += err * x[i];
            }
            gb += err;
        }
        for i in 0..5 {
            w[i] -= cfg.learning_rate * (gw[i] / n + cfg.l2 * w[i]);
        }
        b -= cfg.learning_rate * gb / n;
    }
    Ok(TableTypeModel {
        weights: w.to_vec(),
        bias: b,
        mean,
        scale,
    })
}

pub fn classify_table_type(
    f: &TableTypeFeatures,
    m: &TableTypeModel,
) -> Result<TableKind, TableError> {
    Ok(if m.logit(f)? > 0.0 {
        TableKind::KeyValue
    } else {
        TableKind::EntityInstance
    })
}

/// Plain matrix transpose of a rectangular grid.
pub fn matrix_transpose<T: Clone>(grid: &[Vec<T>]) -> Vec<Vec<T>> {
    let width = grid.first().map_or(0, Vec::len);
    (0..width)
        .map(|c| grid.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Promotes the key column (column 0) to headers; each value column becomes
/// one output row.
pub fn transpose_key_value(t: &Table) -> Result<Table, TableError> {
    if t.kind() != TableKind::KeyValue {
        return Err(TableError::NotKeyValue(t.id().to_string()));
    }
    if t.n_columns() < 2 {
        return Err(TableError::Invalid(format!(
            "key-value table {} needs a key and at least one value column",
            t.id()
        )));
    }
    if t.n_rows() == 0 {
        return Err(TableError::Invalid(format!(
            "key-value table {} has no keys",
            t.id()
        )));
    }
    let mut seen = HashSet::new();
    for key in t.column(0) {
        if !seen.insert(key) {
            return Err(TableError::DuplicateKeys {
                table: t.id().to_string(),
                key: key.to_string(),
            });
        }
    }
    let mut grid = matrix_transpose(t.rows()).into_iter();
    let headers = grid.next().expect("at least two columns");
    let out = Table::new(t.id(), headers, grid.collect())?
        .with_name(t.name())
        .with_kind(TableKind::EntityInstance);
    Ok(out)
}
