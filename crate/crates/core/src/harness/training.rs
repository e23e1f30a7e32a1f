//! Building labeled examples from the corpus and manifest, and scoring
//! trained models on them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::clauses::{
    featurize_select, featurize_where, ClauseContext, QuestionInfo, SelectClassifier,
    SelectFeatures, WhereClassifier, WhereFeatures,
};
use crate::nn::{upsample_positives, TrainConfig};
use crate::retrieval::{precision_at_k, precision_at_k_with, Similarity};
use crate::tabular::{
    classify_table_type, extract_table_type_features, TableKind, TableTypeFeatures, TableTypeModel,
};
use crate::typing::{
    extract_column_type_features, ColumnLabel, ColumnType, ColumnTypeClassifier, ColumnTypeFeatures,
};

use super::manifest::{gold_clauses, GoldClauses, ManifestEntry};
use super::metrics::ConfusionMatrix;
use super::pipeline::Engine;
use super::{Corpus, HarnessError, KindLabel};

/// Positive clause examples appear this many times in the training set.
pub const DEFAULT_UPSAMPLE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    TableType,
    ColumnType,
    Select,
    Where,
    Retrieval,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::TableType => "table-type",
            Task::ColumnType => "column-type",
            Task::Select => "select",
            Task::Where => "where",
            Task::Retrieval => "retrieval",
        }
    }

    /// Whether `train` accepts the task.
    pub fn trainable(self) -> bool {
        self != Task::Retrieval
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table-type" => Ok(Task::TableType),
            "column-type" => Ok(Task::ColumnType),
            "select" => Ok(Task::Select),
            "where" => Ok(Task::Where),
            "retrieval" => Ok(Task::Retrieval),
            other => Err(format!(
                "unknown task {other:?} (expected table-type, column-type, select, where or retrieval)"
            )),
        }
    }
}

/// Features of every labeled table in the raw (untransposed) corpus.
pub fn table_type_examples(
    raw: &Corpus,
    labels: &[KindLabel],
) -> Result<Vec<(TableTypeFeatures, TableKind)>, HarnessError> {
    labels
        .iter()
        .map(|l| Ok((extract_table_type_features(raw.table(&l.table)?), l.kind)))
        .collect()
}

fn kind_index(k: TableKind) -> usize {
    usize::from(k == TableKind::KeyValue)
}

/// Rows and columns are `[entity-instance, key-value]`.
pub fn evaluate_table_types(
    model: &TableTypeModel,
    examples: &[(TableTypeFeatures, TableKind)],
) -> Result<ConfusionMatrix, HarnessError> {
    let mut m = ConfusionMatrix::new(vec!["entity-instance".into(), "key-value".into()]);
    for (f, k) in examples {
        m.record(kind_index(*k), kind_index(classify_table_type(f, model)?));
    }
    Ok(m)
}

/// Features of every labeled column of the normalized corpus.
pub fn column_type_examples(
    corpus: &Corpus,
    labels: &[ColumnLabel],
) -> Result<Vec<(ColumnTypeFeatures, ColumnType)>, HarnessError> {
    labels
        .iter()
        .map(|l| {
            let t = corpus.table(&l.table)?;
            if l.column >= t.n_columns() {
                return Err(HarnessError::BadLabel {
                    line: 0,
                    reason: format!(
                        "column {} out of range for table {} ({} columns)",
                        l.column,
                        l.table,
                        t.n_columns()
                    ),
                });
            }
            Ok((
                extract_column_type_features(t.column(l.column)),
                l.column_type,
            ))
        })
        .collect()
}

/// Holds out whole tables: of the distinct table ids in sorted order,
/// every fifth (the 5th, 10th, ...) goes to the held-out part.
pub fn split_column_labels(labels: &[ColumnLabel]) -> (Vec<ColumnLabel>, Vec<ColumnLabel>) {
    let tables: BTreeSet<&str> = labels.iter().map(|l| l.table.as_str()).collect();
    let held: BTreeSet<&str> = tables
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % 5 == 4)
        .map(|(_, t)| t)
        .collect();
    labels
        .iter()
        .cloned()
        .partition(|l| !held.contains(l.table.as_str()))
}

pub fn evaluate_column_types(
    clf: &ColumnTypeClassifier,
    examples: &[(ColumnTypeFeatures, ColumnType)],
) -> Result<ConfusionMatrix, HarnessError> {
    let mut m = ConfusionMatrix::new(
        ColumnType::ALL
            .iter()
            .map(|t| t.name().to_string())
            .collect(),
    );
    for (f, ty) in examples {
        m.record(ty.index(), clf.classify(f)?.0.index());
    }
    Ok(m)
}

/// Column-type distributions for every table of the corpus.
pub fn column_distributions(
    corpus: &Corpus,
    clf: &ColumnTypeClassifier,
) -> Result<BTreeMap<String, Vec<[f64; 7]>>, HarnessError> {
    corpus
        .iter()
        .map(|t| {
            Ok((
                t.id().to_string(),
                crate::clauses::column_type_distributions(t, clf)?,
            ))
        })
        .collect()
}

fn with_gold_context(
    engine: &Engine,
    entries: &[ManifestEntry],
    mut f: impl FnMut(&ClauseContext<'_>, &GoldClauses) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    for e in entries {
        let table = engine.corpus.table(&e.table)?;
        let gold = gold_clauses(&e.parsed_query()?, table)?;
        let info = QuestionInfo::analyze(&e.id, &e.question, &engine.tagger)?;
        let ctx = ClauseContext {
            question: &info,
            table,
            column_types: &engine.column_types[&e.table],
            store: &engine.store,
        };
        f(&ctx, &gold)?;
    }
    Ok(())
}

/// One example per (question, gold-table column); positive when the
/// column is in the gold SELECT list.
pub fn select_examples(
    engine: &Engine,
    entries: &[ManifestEntry],
) -> Result<Vec<(SelectFeatures, bool)>, HarnessError> {
    let mut out = Vec::new();
    with_gold_context(engine, entries, |ctx, gold| {
        for col in 0..ctx.table.n_columns() {
            out.push((featurize_select(ctx, col)?, gold.select.contains(&col)));
        }
        Ok(())
    })?;
    Ok(out)
}

/// One example per (question, gold-table column, candidate word); positive
/// when the gold query has a condition on that column whose lowercased
/// keyword is the word. The in-SELECT feature uses the gold SELECT list.
pub fn where_examples(
    engine: &Engine,
    entries: &[ManifestEntry],
) -> Result<Vec<(WhereFeatures, bool)>, HarnessError> {
    let mut out = Vec::new();
    with_gold_context(engine, entries, |ctx, gold| {
        let words = ctx.question.candidate_words();
        for col in 0..ctx.table.n_columns() {
            for &w in &words {
                let token = &ctx.question.tokens[w];
                let positive = gold.conditions.iter().any(|(c, k)| *c == col && k == token);
                out.push((featurize_where(ctx, col, w, &gold.select)?, positive));
            }
        }
        Ok(())
    })?;
    Ok(out)
}

fn upsampled<F: Clone>(examples: &[(F, bool)], factor: usize, seed: u64) -> Vec<(F, bool)> {
    let indexed: Vec<(F, usize)> = examples
        .iter()
        .map(|(f, y)| (f.clone(), usize::from(*y)))
        .collect();
    upsample_positives(&indexed, factor.max(1), seed)
        .into_iter()
        .map(|(f, y)| (f, y == 1))
        .collect()
}

/// Upsamples positives by `factor` (seeded by `cfg.seed`) and trains.
pub fn train_select(
    examples: &[(SelectFeatures, bool)],
    cfg: &TrainConfig,
    factor: usize,
) -> Result<SelectClassifier, HarnessError> {
    if examples.is_empty() {
        return Err(HarnessError::NoExamples);
    }
    Ok(SelectClassifier::train(
        &upsampled(examples, factor, cfg.seed),
        cfg,
    )?)
}

pub fn train_where(
    examples: &[(WhereFeatures, bool)],
    cfg: &TrainConfig,
    factor: usize,
) -> Result<WhereClassifier, HarnessError> {
    if examples.is_empty() {
        return Err(HarnessError::NoExamples);
    }
    Ok(WhereClassifier::train(
        &upsampled(examples, factor, cfg.seed),
        cfg,
    )?)
}

fn binary_matrix() -> ConfusionMatrix {
    ConfusionMatrix::new(vec!["negative".into(), "positive".into()])
}

pub fn evaluate_select(
    clf: &SelectClassifier,
    examples: &[(SelectFeatures, bool)],
) -> Result<ConfusionMatrix, HarnessError> {
    let mut m = binary_matrix();
    for (f, y) in examples {
        let [neg, pos] = clf.probabilities(f)?;
        m.record(usize::from(*y), usize::from(pos > neg));
    }
    Ok(m)
}

pub fn evaluate_where(
    clf: &WhereClassifier,
    examples: &[(WhereFeatures, bool)],
) -> Result<ConfusionMatrix, HarnessError> {
    let mut m = binary_matrix();
    for (f, y) in examples {
        let [neg, pos] = clf.probabilities(f)?;
        m.record(usize::from(*y), usize::from(pos > neg));
    }
    Ok(m)
}

/// P@k over the whole corpus for each `k`, plain (gold table only) and
/// adjusted (gold or any declared alternate).
pub fn evaluate_retrieval(
    engine: &Engine,
    entries: &[ManifestEntry],
    sim: Similarity,
    ks: &[usize],
) -> (BTreeMap<usize, f64>, BTreeMap<usize, f64>) {
    let rankings: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            engine
                .index
                .score(&e.question, sim)
                .into_iter()
                .map(|(id, _)| id)
                .collect()
        })
        .collect();
    let gold: Vec<String> = entries.iter().map(|e| e.table.clone()).collect();
    let plain = ks
        .iter()
        .map(|&k| (k, precision_at_k(&rankings, &gold, k)))
        .collect();
    let adjusted = ks
        .iter()
        .map(|&k| {
            let p = precision_at_k_with(&rankings, k, |i, id| {
                entries[i].accepted_tables().any(|t| t == id)
            });
            (k, p)
        })
        .collect();
    (plain, adjusted)
}
