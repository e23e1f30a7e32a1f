//! The question manifest: one JSON object per line.
//!
//! ```text
//! {"id":"q01","question":"Who is the husband of Whoopi Goldberg?","table":"whoopi_goldberg",
//!  "alternates":[],"query":"SELECT \"Spouse\" FROM \"whoopi_goldberg\" WHERE \"Name\" ~ 'whoopi'",
//!  "answer":[[0,3]],"split":"train"}
//! ```
//!
//! `alternates` may be omitted. `answer` lists `[row, column]` pairs of the
//! gold table. Blank lines and lines starting with `#` are skipped.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::{EmbeddingStore, SimMatchConfig};
use crate::query::{self, CellSet, QueryError, StructuredQuery};
use crate::tabular::Table;

use super::{Corpus, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!(
                "unknown split {other:?} (expected train, dev or test)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub question: String,
    pub table: String,
    #[serde(default)]
    pub alternates: Vec<String>,
    pub query: String,
    pub answer: CellSet,
    pub split: Split,
}

impl ManifestEntry {
    pub fn parsed_query(&self) -> Result<StructuredQuery, QueryError> {
        query::parse_query(&self.query)
    }

    /// The gold table followed by the declared alternates.
    pub fn accepted_tables(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.table.as_str()).chain(self.alternates.iter().map(String::as_str))
    }
}

/// Why one manifest entry was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationFailure {
    pub id: String,
    pub cause: String,
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.cause)
    }
}

/// Decodes the line format without consulting any tables.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let entry = serde_json::from_str(line).map_err(|e| HarnessError::ManifestSyntax {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(entry);
    }
    Ok(out)
}

fn check_entry(
    e: &ManifestEntry,
    corpus: &Corpus,
    store: &EmbeddingStore,
    cfg: &SimMatchConfig,
) -> Result<(), String> {
    let q = e
        .parsed_query()
        .map_err(|err| format!("gold query: {err}"))?;
    if q.from_table != e.table {
        return Err(format!(
            "gold query reads {:?} but the entry names table {:?}",
            q.from_table, e.table
        ));
    }
    let t = corpus
        .get(&e.table)
        .ok_or_else(|| format!("unknown table {:?}", e.table))?;
    if let Some(alt) = e.alternates.iter().find(|a| !corpus.contains(a)) {
        return Err(format!("unknown alternate table {alt:?}"));
    }
    if e.answer.is_empty() {
        return Err("empty gold answer".into());
    }
    let got = query::execute(&q, t, store, cfg).map_err(|err| format!("gold query: {err}"))?;
    if got != e.answer {
        let show = |c: &CellSet| format!("{:?}", c.iter().collect::<Vec<_>>());
        return Err(format!(
            "gold query yields {} but the recorded answer is {}",
            show(&got),
            show(&e.answer)
        ));
    }
    Ok(())
}

/// Checks every entry against the corpus: the query parses, reads the
/// entry's table, and executes to exactly the recorded answer; ids are
/// unique and every referenced table exists.
pub fn validate_manifest(
    entries: &[ManifestEntry],
    corpus: &Corpus,
    store: &EmbeddingStore,
    cfg: &SimMatchConfig,
) -> Result<(), HarnessError> {
    let mut seen = HashSet::new();
    let mut failures = Vec::new();
    for e in entries {
        let cause = if !seen.insert(e.id.as_str()) {
            Some("duplicate question id".to_string())
        } else {
            check_entry(e, corpus, store, cfg).err()
        };
        if let Some(cause) = cause {
            failures.push(ValidationFailure {
                id: e.id.clone(),
                cause,
            });
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Validation(failures))
    }
}

/// Reads, parses and validates a manifest file.
pub fn load_manifest(
    path: &Path,
    corpus: &Corpus,
    store: &EmbeddingStore,
    cfg: &SimMatchConfig,
) -> Result<Vec<ManifestEntry>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let entries = parse_manifest(&text)?;
    validate_manifest(&entries, corpus, store, cfg)?;
    Ok(entries)
}

/// Column indices and lowercased keywords of a gold query.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldClauses {
    pub select: BTreeSet<usize>,
    pub conditions: Vec<(usize, String)>,
}

pub fn gold_clauses(q: &StructuredQuery, t: &Table) -> Result<GoldClauses, QueryError> {
    let col = |name: &str| {
        t.column_index(name)
            .ok_or_else(|| QueryError::UnknownColumn(name.to_string()))
    };
    Ok(GoldClauses {
        select: q.select.iter().map(|c| col(c)).collect::<Result<_, _>>()?,
        conditions: q
            .conditions
            .iter()
            .map(|c| Ok((col(&c.column)?, c.keyword.to_lowercase())))
            .collect::<Result<_, QueryError>>()?,
    })
}
