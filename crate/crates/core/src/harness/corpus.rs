//! Table collections on disk and the workspace directory layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::tabular::{
    self, classify_table_type, extract_table_type_features, Table, TableFormat, TableKind,
    TableTypeModel,
};

use super::HarnessError;

/// Tables keyed by id, iterated in id order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tables: BTreeMap<String, Table>,
}

impl Corpus {
    pub fn new() -> Corpus {
        Corpus::default()
    }

    pub fn from_tables<I: IntoIterator<Item = Table>>(tables: I) -> Result<Corpus, HarnessError> {
        let mut c = Corpus::new();
        for t in tables {
            c.insert(t)?;
        }
        Ok(c)
    }

    pub fn insert(&mut self, t: Table) -> Result<(), HarnessError> {
        if self.tables.contains_key(t.id()) {
            return Err(HarnessError::DuplicateTable(t.id().to_string()));
        }
        self.tables.insert(t.id().to_string(), t);
        Ok(())
    }

    /// Loads every `.csv` and `.tsv` file directly inside `dir`; table ids
    /// are file stems.
    pub fn load_dir(dir: &Path) -> Result<Corpus, HarnessError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| HarnessError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && TableFormat::from_path(p).is_some())
            .collect();
        paths.sort();
        let mut c = Corpus::new();
        for p in paths {
            let format = TableFormat::from_path(&p).expect("filtered above");
            c.insert(tabular::load_table(&p, format)?)?;
        }
        Ok(c)
    }

    /// Writes every table as CSV into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for t in self.tables.values() {
            tabular::write_table(t, &dir.join(format!("{}.csv", t.id())), TableFormat::Csv)?;
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Table> {
        self.tables.get(id)
    }

    pub fn table(&self, id: &str) -> Result<&Table, HarnessError> {
        self.get(id)
            .ok_or_else(|| HarnessError::UnknownTable(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.tables.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Table> {
        self.tables.values()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

/// One line of a table-kind label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindLabel {
    pub table: String,
    pub kind: TableKind,
}

/// Parses `table<TAB>kind` lines (`kind` is `entity-instance` or
/// `key-value`); `#` starts a comment.
pub fn parse_kind_labels(text: &str) -> Result<Vec<KindLabel>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| HarnessError::BadLabel {
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [table, kind] = fields[..] else {
            return Err(bad(format!(
                "expected 2 tab-separated fields, found {}",
                fields.len()
            )));
        };
        let kind: TableKind = kind.parse().map_err(bad)?;
        if kind == TableKind::Unknown {
            return Err(bad("a label must be entity-instance or key-value".into()));
        }
        out.push(KindLabel {
            table: table.to_string(),
            kind,
        });
    }
    Ok(out)
}

pub fn load_kind_labels(path: &Path) -> Result<Vec<KindLabel>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_kind_labels(&text)
}

/// Produces the entity-instance form of every table. A table's kind comes
/// from `labels` when listed there, otherwise from `model`; key-value
/// tables are transposed.
pub fn normalize_corpus(
    raw: &Corpus,
    labels: &[KindLabel],
    model: Option<&TableTypeModel>,
) -> Result<Corpus, HarnessError> {
    let known: BTreeMap<&str, TableKind> =
        labels.iter().map(|l| (l.table.as_str(), l.kind)).collect();
    let mut out = Corpus::new();
    for t in raw.iter() {
        let kind = match (known.get(t.id()), model) {
            (Some(&k), _) => k,
            (None, Some(m)) => classify_table_type(&extract_table_type_features(t), m)?,
            (None, None) => TableKind::EntityInstance,
        };
        let t = t.clone().with_kind(kind);
        out.insert(match kind {
            TableKind::KeyValue => tabular::transpose_key_value(&t)?,
            _ => t.with_kind(TableKind::EntityInstance),
        })?;
    }
    Ok(out)
}

/// Paths inside a workspace directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub const TABLE_TYPE_MODEL: &'static str = "table-type.json";
    pub const COLUMN_TYPE_MODEL: &'static str = "column-type.json";
    pub const SELECT_MODEL: &'static str = "select.json";
    pub const WHERE_MODEL: &'static str = "where.json";

    pub fn new(root: impl Into<PathBuf>) -> Workspace {
        Workspace { root: root.into() }
    }

    /// Creates the root and its three subdirectories.
    pub fn create(root: impl Into<PathBuf>) -> Result<Workspace, HarnessError> {
        let ws = Workspace::new(root);
        for d in [ws.tables_dir(), ws.models_dir(), ws.reports_dir()] {
            fs::create_dir_all(&d).map_err(|e| HarnessError::io(&d, e))?;
        }
        Ok(ws)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn tables_dir(&self) -> PathBuf {
        self.root.join("tables")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn model_path(&self, file: &str) -> PathBuf {
        self.models_dir().join(file)
    }

    /// Word vectors copied in at ingest time.
    pub fn embeddings_path(&self) -> PathBuf {
        self.root.join("embeddings.vec")
    }

    /// Question manifest copied in at ingest time.
    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.jsonl")
    }

    pub fn load_corpus(&self) -> Result<Corpus, HarnessError> {
        Corpus::load_dir(&self.tables_dir())
    }
}
