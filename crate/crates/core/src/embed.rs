//! Word-embedding storage and the `~` (SimMatch) proximity operator.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file is empty")]
    EmptyFile,
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
}

/// Token to dense vector map; every vector has length `dim`.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    /// An empty store: every lookup is out of vocabulary.
    pub fn empty(dim: usize) -> EmbeddingStore {
        EmbeddingStore {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<EmbeddingStore, EmbedError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut store = EmbeddingStore::empty(dim);
        for (i, (token, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbedError::MalformedLine {
                    line: i + 1,
                    reason: format!("expected {dim} components, found {}", v.len()),
                });
            }
            store.vectors.insert(token.into().to_lowercase(), v);
        }
        Ok(store)
    }

    /// Reads the word2vec text format: one `token v1 v2 ...` line per
    /// token. An optional first line `count dim` (two integers) is checked
    /// against the body.
    pub fn parse(text: &str) -> Result<EmbeddingStore, EmbedError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        let mut header = None;
        for (i, line) in text.lines().enumerate() {
            if vectors.is_empty() && header.is_none() {
                if let Some(h) = parse_header(line) {
                    dim = Some(h.1);
                    header = Some(h);
                    continue;
                }
            }
            let mut parts = line.split_whitespace();
            let Some(token) = parts.next() else {
                continue;
            };
            let values = parts
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| EmbedError::MalformedLine {
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            let expected = *dim.get_or_insert(values.len());
            if values.is_empty() || values.len() != expected {
                return Err(EmbedError::MalformedLine {
                    line: i + 1,
                    reason: format!("expected {expected} components, found {}", values.len()),
                });
            }
            vectors.insert(token.to_lowercase(), values);
        }
        if let Some((count, _)) = header {
            if count != vectors.len() {
                return Err(EmbedError::MalformedLine {
                    line: 1,
                    reason: format!("header announces {count} tokens, found {}", vectors.len()),
                });
            }
        }
        match dim {
            Some(dim) if dim > 0 && !vectors.is_empty() => Ok(EmbeddingStore { dim, vectors }),
            _ => Err(EmbedError::EmptyFile),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Case-insensitive lookup; zero-norm vectors count as missing.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        let v = match self.vectors.get(token) {
            Some(v) => v,
            None => self.vectors.get(&token.to_lowercase())?,
        };
        (norm(v) > 0.0).then_some(v.as_slice())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.get(token).is_some()
    }
}

/// Reads the `token f1 ... fd` text format; `dim` comes from the first line.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore, EmbedError> {
    let text = fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    EmbeddingStore::parse(&text)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields[..] {
        [count, dim] => Some((count.parse().ok()?, dim.parse().ok()?)),
        _ => None,
    }
}

/// Cosine similarity of two tokens, absent when either is out of vocabulary.
pub fn proximity(store: &EmbeddingStore, a: &str, b: &str) -> Option<f64> {
    Some(cosine(store.get(a)?, store.get(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distance {
    Cosine,
    Euclidean,
}

impl Distance {
    pub fn between(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Cosine => 1.0 - cosine(a, b),
            Distance::Euclidean => euclidean(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimMatchConfig {
    /// Largest distance still counted as a match.
    pub threshold: f64,
    pub distance: Distance,
}

impl SimMatchConfig {
    pub fn new(threshold: f64, distance: Distance) -> Option<SimMatchConfig> {
        (threshold.is_finite() && threshold > 0.0).then_some(SimMatchConfig {
            threshold,
            distance,
        })
    }
}

impl Default for SimMatchConfig {
    fn default() -> Self {
        SimMatchConfig {
            threshold: 0.45,
            distance: Distance::Cosine,
        }
    }
}

/// Which stage of the `~` operator accepted a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStage {
    Exact,
    Substring,
    Embedding,
}

/// The `~` operator with the stage that fired, if any.
pub fn sim_match_stage(
    store: &EmbeddingStore,
    cfg: &SimMatchConfig,
    cell: &str,
    keyword: &str,
) -> Option<MatchStage> {
    let cell_l = cell.trim().to_lowercase();
    let kw_l = keyword.trim().to_lowercase();
    if cell_l == kw_l {
        return Some(MatchStage::Exact);
    }
    if cell_l.contains(&kw_l) {
        return Some(MatchStage::Substring);
    }
    let cell_tokens = textproc::split_words(cell);
    let kw_tokens = textproc::split_words(keyword);
    for k in kw_tokens.iter().filter_map(|t| store.get(t)) {
        for c in cell_tokens.iter().filter_map(|t| store.get(t)) {
            if cfg.distance.between(c, k) <= cfg.threshold {
                return Some(MatchStage::Embedding);
            }
        }
    }
    None
}

/// Exact match, then substring (LIKE), then embedding distance under the
/// configured threshold.
pub fn sim_match(store: &EmbeddingStore, cfg: &SimMatchConfig, cell: &str, keyword: &str) -> bool {
    sim_match_stage(store, cfg, cell, keyword).is_some()
}
