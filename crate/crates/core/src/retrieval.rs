//! Source selection: rank tables against a question in TF-IDF space.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tabular::Table;
use crate::textproc;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("cannot build an index over zero tables")]
    NoTables,
}

pub type SparseVector = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Similarity {
    Cosine,
    Dot,
    InvEuclidean,
}

impl Similarity {
    pub const ALL: [Similarity; 3] = [
        Similarity::Cosine,
        Similarity::Dot,
        Similarity::InvEuclidean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Similarity::Cosine => "cosine",
            Similarity::Dot => "dot",
            Similarity::InvEuclidean => "inv-euclidean",
        }
    }
}

impl FromStr for Similarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(Similarity::Cosine),
            "dot" => Ok(Similarity::Dot),
            "inv-euclidean" | "inveuclidean" | "euclidean" => Ok(Similarity::InvEuclidean),
            other => Err(format!("unknown similarity {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TfIdfIndex {
    idf: HashMap<String, f64>,
    table_vectors: BTreeMap<String, SparseVector>,
}

/// The text a table contributes to its bag of words: name, headers, cells.
fn table_text(t: &Table) -> String {
    let mut s = String::new();
    s.push_str(t.name());
    for h in t.headers() {
        s.push(' ');
        s.push_str(h);
    }
    for row in t.rows() {
        for cell in row {
            s.push(' ');
            s.push_str(cell);
        }
    }
    s
}

/// Relative term frequency: occurrences of each stem divided by the number
/// of stems in the text.
fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for stem in textproc::tokenize(text, true).stems() {
        *tf.entry(stem.clone()).or_insert(0.0) += 1.0;
    }
    let total: f64 = tf.values().sum();
    for v in tf.values_mut() {
        *v /= total;
    }
    tf
}

impl TfIdfIndex {
    pub fn build<'a, I>(tables: I) -> Result<TfIdfIndex, RetrievalError>
    where
        I: IntoIterator<Item = &'a Table>,
    {
        let counts: Vec<(String, BTreeMap<String, f64>)> = tables
            .into_iter()
            .map(|t| (t.id().to_string(), term_frequencies(&table_text(t))))
            .collect();
        if counts.is_empty() {
            return Err(RetrievalError::NoTables);
        }
        let n = counts.len() as f64;
        let mut df: HashMap<String, f64> = HashMap::new();
        for (_, tf) in &counts {
            for stem in tf.keys() {
                *df.entry(stem.clone()).or_insert(0.0) += 1.0;
            }
        }
        let idf: HashMap<String, f64> = df.into_iter().map(|(s, d)| (s, (n / d).ln())).collect();
        let table_vectors = counts
            .into_iter()
            .map(|(id, tf)| {
                let v = tf.into_iter().map(|(s, c)| {
                    let w = c * idf[&s];
                    (s, w)
                });
                (id, v.collect())
            })
            .collect();
        Ok(TfIdfIndex { idf, table_vectors })
    }

    pub fn idf(&self, stem: &str) -> Option<f64> {
        self.idf.get(stem).copied()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.idf.keys().map(String::as_str)
    }

    pub fn table_ids(&self) -> impl Iterator<Item = &str> {
        self.table_vectors.keys().map(String::as_str)
    }

    pub fn table_vector(&self, id: &str) -> Option<&SparseVector> {
        self.table_vectors.get(id)
    }

    pub fn len(&self) -> usize {
        self.table_vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table_vectors.is_empty()
    }

    /// Question TF-IDF vector; stems unseen in the tables are dropped.
    pub fn vectorize(&self, question: &str) -> SparseVector {
        term_frequencies(question)
            .into_iter()
            .filter_map(|(s, c)| self.idf.get(&s).map(|idf| (s, c * idf)))
            .collect()
    }

    /// Ranks every indexed table, best first; ties go to the smaller id.
    pub fn score(&self, question: &str, sim: Similarity) -> Vec<(String, f64)> {
        self.score_among(question, sim, |_| true)
    }

    /// Ranks only the tables accepted by `keep`, using corpus-wide IDF.
    pub fn score_among(
        &self,
        question: &str,
        sim: Similarity,
        keep: impl Fn(&str) -> bool,
    ) -> Vec<(String, f64)> {
        let q = self.vectorize(question);
        let mut ranked: Vec<(String, f64)> = self
            .table_vectors
            .iter()
            .filter(|(id, _)| keep(id))
            .map(|(id, v)| (id.clone(), similarity(&q, v, sim)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked
    }
}

pub fn build_index(tables: &[Table]) -> Result<TfIdfIndex, RetrievalError> {
    TfIdfIndex::build(tables)
}

fn sparse_dot(a: &SparseVector, b: &SparseVector) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum()
}

fn sparse_norm(a: &SparseVector) -> f64 {
    a.values().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn similarity(q: &SparseVector, t: &SparseVector, sim: Similarity) -> f64 {
    match sim {
        Similarity::Dot => sparse_dot(q, t),
        Similarity::Cosine => {
            let denom = sparse_norm(q) * sparse_norm(t);
            if denom == 0.0 {
                0.0
            } else {
                sparse_dot(q, t) / denom
            }
        }
        Similarity::InvEuclidean => {
            let keys: BTreeSet<&String> = q.keys().chain(t.keys()).collect();
            let d2: f64 = keys
                .into_iter()
                .map(|k| {
                    let x = q.get(k).copied().unwrap_or(0.0);
                    let y = t.get(k).copied().unwrap_or(0.0);
                    (x - y).powi(2)
                })
                .sum();
            1.0 / (1.0 + d2.sqrt())
        }
    }
}

/// Fraction of questions whose gold table is among the top `k`.
pub fn precision_at_k<S: AsRef<str>>(rankings: &[Vec<S>], gold: &[S], k: usize) -> f64 {
    precision_at_k_with(rankings, k, |i, id| id == gold[i].as_ref())
}

/// P@k where a question counts as a hit if any accepted table is in the top `k`.
pub fn precision_at_k_with<S: AsRef<str>>(
    rankings: &[Vec<S>],
    k: usize,
    accept: impl Fn(usize, &str) -> bool,
) -> f64 {
    if rankings.is_empty() {
        return 0.0;
    }
    let hits = rankings
        .iter()
        .enumerate()
        .filter(|(i, ranked)| ranked.iter().take(k).any(|id| accept(*i, id.as_ref())))
        .count();
    hits as f64 / rankings.len() as f64
}
