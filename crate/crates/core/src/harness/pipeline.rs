//! End-to-end question answering: retrieval, clause prediction, row
//! selection and cell intersection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::clauses::{
    self, ClauseContext, ClauseError, QuestionInfo, SelectClassifier, TagProvider, WhereClassifier,
};
use crate::embed::EmbeddingStore;
use crate::query::{self, CellSet, Condition, StructuredQuery};
use crate::retrieval::{Similarity, TfIdfIndex};

use super::manifest::{gold_clauses, GoldClauses, ManifestEntry, Split};
use super::metrics::{cell_prf, macro_average, Prf};
use super::{Corpus, HarnessError};

/// Which tables the pipeline may answer from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// The gold table is handed over; retrieval is skipped.
    GoldenTable,
    /// Tables referenced by manifest entries of the question's split.
    IndividualSet,
    /// Every table in the corpus.
    AllSets,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::GoldenTable, Scope::IndividualSet, Scope::AllSets];

    pub fn name(self) -> &'static str {
        match self {
            Scope::GoldenTable => "golden",
            Scope::IndividualSet => "individual",
            Scope::AllSets => "all",
        }
    }

    /// The candidate tables for `entry`, given the whole manifest.
    pub fn candidates(self, entry: &ManifestEntry, manifest: &[ManifestEntry]) -> Candidates {
        match self {
            Scope::GoldenTable => Candidates::Golden(entry.table.clone()),
            Scope::IndividualSet => Candidates::Among(split_tables(manifest, entry.split)),
            Scope::AllSets => Candidates::All,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "golden" | "golden-table" => Ok(Scope::GoldenTable),
            "individual" | "individual-set" => Ok(Scope::IndividualSet),
            "all" | "all-sets" => Ok(Scope::AllSets),
            other => Err(format!(
                "unknown scope {other:?} (expected golden, individual or all)"
            )),
        }
    }
}

fn split_tables(manifest: &[ManifestEntry], split: Split) -> BTreeSet<String> {
    manifest
        .iter()
        .filter(|e| e.split == split)
        .flat_map(|e| e.accepted_tables().map(str::to_string))
        .collect()
}

/// The resolved table set one question is answered from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidates {
    Golden(String),
    Among(BTreeSet<String>),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowMode {
    WordMatch,
    Embedding,
}

impl RowMode {
    pub const ALL: [RowMode; 2] = [RowMode::WordMatch, RowMode::Embedding];

    pub fn name(self) -> &'static str {
        match self {
            RowMode::WordMatch => "word-match",
            RowMode::Embedding => "embedding",
        }
    }
}

impl fmt::Display for RowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RowMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "word-match" | "word" | "wordmatch" => Ok(RowMode::WordMatch),
            "embedding" | "embed" => Ok(RowMode::Embedding),
            other => Err(format!(
                "unknown row mode {other:?} (expected word-match or embedding)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Retrieval,
    Analysis,
    Select,
    Where,
    Rows,
    Cells,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Retrieval => "retrieval",
            Stage::Analysis => "analysis",
            Stage::Select => "select",
            Stage::Where => "where",
            Stage::Rows => "rows",
            Stage::Cells => "cells",
        })
    }
}

/// A pipeline failure tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{stage} stage: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

impl StageError {
    fn at(stage: Stage) -> impl FnOnce(String) -> StageError {
        move |message| StageError { stage, message }
    }
}

/// SELECT and WHERE prediction for one (question, table) context.
pub trait ClausePredictor: Sync {
    fn select(&self, ctx: &ClauseContext<'_>) -> Result<BTreeSet<usize>, ClauseError>;

    fn where_pairs(
        &self,
        ctx: &ClauseContext<'_>,
        select: &BTreeSet<usize>,
    ) -> Result<Vec<(usize, String)>, ClauseError>;
}

/// The two trained clause heads.
#[derive(Debug, Clone)]
pub struct TrainedClauses {
    pub select: SelectClassifier,
    pub where_: WhereClassifier,
}

impl ClausePredictor for TrainedClauses {
    fn select(&self, ctx: &ClauseContext<'_>) -> Result<BTreeSet<usize>, ClauseError> {
        clauses::predict_select(ctx, &self.select)
    }

    fn where_pairs(
        &self,
        ctx: &ClauseContext<'_>,
        select: &BTreeSet<usize>,
    ) -> Result<Vec<(usize, String)>, ClauseError> {
        clauses::predict_where(ctx, &self.where_, select)
    }
}

/// Returns each question's gold clauses when asked about its gold table
/// and nothing otherwise.
#[derive(Debug, Clone, Default)]
pub struct OracleClauses {
    gold: BTreeMap<String, (String, GoldClauses)>,
}

impl OracleClauses {
    pub fn from_manifest(
        entries: &[ManifestEntry],
        corpus: &Corpus,
    ) -> Result<OracleClauses, HarnessError> {
        let mut gold = BTreeMap::new();
        for e in entries {
            let g = gold_clauses(&e.parsed_query()?, corpus.table(&e.table)?)?;
            gold.insert(e.id.clone(), (e.table.clone(), g));
        }
        Ok(OracleClauses { gold })
    }

    fn lookup(&self, ctx: &ClauseContext<'_>) -> Option<&GoldClauses> {
        self.gold
            .get(&ctx.question.id)
            .filter(|(table, _)| table == ctx.table.id())
            .map(|(_, g)| g)
    }
}

impl ClausePredictor for OracleClauses {
    fn select(&self, ctx: &ClauseContext<'_>) -> Result<BTreeSet<usize>, ClauseError> {
        Ok(self
            .lookup(ctx)
            .map(|g| g.select.clone())
            .unwrap_or_default())
    }

    fn where_pairs(
        &self,
        ctx: &ClauseContext<'_>,
        _select: &BTreeSet<usize>,
    ) -> Result<Vec<(usize, String)>, ClauseError> {
        Ok(self
            .lookup(ctx)
            .map(|g| g.conditions.clone())
            .unwrap_or_default())
    }
}

/// Immutable state shared by every question.
#[derive(Debug, Clone)]
pub struct Engine {
    pub corpus: Corpus,
    pub index: TfIdfIndex,
    pub store: EmbeddingStore,
    /// Per-table, per-column type distributions.
    pub column_types: BTreeMap<String, Vec<[f64; 7]>>,
    pub tagger: TagProvider,
    pub similarity: Similarity,
}

impl Engine {
    /// Builds the TF-IDF index over the whole corpus. Every table must
    /// have column-type distributions.
    pub fn new(
        corpus: Corpus,
        store: EmbeddingStore,
        column_types: BTreeMap<String, Vec<[f64; 7]>>,
    ) -> Result<Engine, HarnessError> {
        if let Some(id) = corpus.ids().find(|id| !column_types.contains_key(*id)) {
            return Err(HarnessError::UnknownTable(format!(
                "{id} (no column types)"
            )));
        }
        let index = TfIdfIndex::build(corpus.iter())?;
        Ok(Engine {
            corpus,
            index,
            store,
            column_types,
            tagger: TagProvider::default(),
            similarity: Similarity::InvEuclidean,
        })
    }

    pub fn with_tagger(mut self, tagger: TagProvider) -> Engine {
        self.tagger = tagger;
        self
    }

    pub fn with_similarity(mut self, sim: Similarity) -> Engine {
        self.similarity = sim;
        self
    }

    /// Top-1 table among the candidates.
    pub fn retrieve(&self, question: &str, candidates: &Candidates) -> Option<String> {
        match candidates {
            Candidates::Golden(id) => self.corpus.contains(id).then(|| id.clone()),
            Candidates::Among(keep) => self
                .index
                .score_among(question, self.similarity, |id| keep.contains(id))
                .into_iter()
                .next()
                .map(|(id, _)| id),
            Candidates::All => self
                .index
                .score(question, self.similarity)
                .into_iter()
                .next()
                .map(|(id, _)| id),
        }
    }
}

/// What the pipeline produced for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub table: String,
    pub query: StructuredQuery,
    pub cells: CellSet,
}

/// Answers one question. The constructed query lists the predicted SELECT
/// columns and one `~` condition per predicted WHERE pair; the cells come
/// from row selection under `row_mode`, not from executing that query.
pub fn run_pipeline(
    engine: &Engine,
    question_id: &str,
    question: &str,
    candidates: &Candidates,
    row_mode: RowMode,
    predictor: &dyn ClausePredictor,
) -> Result<PipelineOutput, StageError> {
    let table_id = engine
        .retrieve(question, candidates)
        .ok_or_else(|| StageError::at(Stage::Retrieval)("no candidate tables".into()))?;
    let table = engine
        .corpus
        .get(&table_id)
        .expect("retrieved from the corpus");
    let column_types = &engine.column_types[&table_id];

    let info = QuestionInfo::analyze(question_id, question, &engine.tagger)
        .map_err(|e| StageError::at(Stage::Analysis)(e.to_string()))?;
    let ctx = ClauseContext {
        question: &info,
        table,
        column_types,
        store: &engine.store,
    };
    let select = predictor
        .select(&ctx)
        .map_err(|e| StageError::at(Stage::Select)(e.to_string()))?;
    let pairs = predictor
        .where_pairs(&ctx, &select)
        .map_err(|e| StageError::at(Stage::Where)(e.to_string()))?;

    let header = |c: usize| {
        table.headers().get(c).cloned().ok_or_else(|| {
            StageError::at(Stage::Rows)(format!("column {c} out of range for table {table_id}"))
        })
    };
    let mut q = StructuredQuery::new(
        select
            .iter()
            .map(|&c| header(c))
            .collect::<Result<_, _>>()?,
        table_id.clone(),
    );
    for (c, kw) in &pairs {
        q = q.with_condition(Condition::sim(header(*c)?, kw.clone()));
    }

    let rows = match row_mode {
        RowMode::WordMatch => query::select_rows_word_match(table, &pairs),
        RowMode::Embedding => query::select_rows_embedding(table, &pairs, &engine.store),
    };
    let cells = query::intersect_cells(table, &rows, &select)
        .map_err(|e| StageError::at(Stage::Cells)(e.to_string()))?;
    Ok(PipelineOutput {
        table: table_id,
        query: q,
        cells,
    })
}

/// Score and diagnostics for one evaluated question.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionOutcome {
    pub id: String,
    pub table: Option<String>,
    pub query: Option<String>,
    pub prf: Prf,
    pub error: Option<String>,
}

/// Results of one (scope, row mode) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeReport {
    pub scope: Scope,
    pub row_mode: RowMode,
    pub outcomes: Vec<QuestionOutcome>,
    pub macro_prf: Prf,
    /// Fraction of questions whose answer came from the gold table.
    pub table_hit_rate: f64,
}

impl ScopeReport {
    pub fn failures(&self) -> impl Iterator<Item = &QuestionOutcome> {
        self.outcomes.iter().filter(|o| o.error.is_some())
    }
}

/// One cell of the scope x row-mode grid.
pub type SweepCell = ScopeReport;

/// Runs every entry of `questions` concurrently. Cells drawn from a table
/// other than the gold one score 0; a stage error scores 0 and is recorded.
pub fn evaluate_pipeline(
    engine: &Engine,
    questions: &[ManifestEntry],
    manifest: &[ManifestEntry],
    scope: Scope,
    row_mode: RowMode,
    predictor: &dyn ClausePredictor,
) -> ScopeReport {
    let outcomes: Vec<QuestionOutcome> = questions
        .par_iter()
        .map(|e| {
            let cands = scope.candidates(e, manifest);
            match run_pipeline(engine, &e.id, &e.question, &cands, row_mode, predictor) {
                Ok(out) => QuestionOutcome {
                    id: e.id.clone(),
                    prf: if out.table == e.table {
                        cell_prf(&out.cells, &e.answer)
                    } else {
                        Prf::default()
                    },
                    query: Some(out.query.to_string()),
                    table: Some(out.table),
                    error: None,
                },
                Err(err) => QuestionOutcome {
                    id: e.id.clone(),
                    table: None,
                    query: None,
                    prf: Prf::default(),
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    let scores: Vec<Prf> = outcomes.iter().map(|o| o.prf).collect();
    let hits = outcomes
        .iter()
        .zip(questions)
        .filter(|(o, e)| o.table.as_deref() == Some(e.table.as_str()))
        .count();
    ScopeReport {
        scope,
        row_mode,
        macro_prf: macro_average(&scores),
        table_hit_rate: if questions.is_empty() {
            0.0
        } else {
            hits as f64 / questions.len() as f64
        },
        outcomes,
    }
}

/// Every scope crossed with every row mode, scopes outermost.
pub fn pipeline_sweep(
    engine: &Engine,
    questions: &[ManifestEntry],
    manifest: &[ManifestEntry],
    predictor: &dyn ClausePredictor,
) -> Vec<SweepCell> {
    Scope::ALL
        .iter()
        .flat_map(|&s| RowMode::ALL.iter().map(move |&m| (s, m)))
        .map(|(s, m)| evaluate_pipeline(engine, questions, manifest, s, m, predictor))
        .collect()
}
