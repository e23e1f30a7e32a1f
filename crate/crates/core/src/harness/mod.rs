//! Dataset handling, training and evaluation orchestration, and metrics.
//!
//! A workspace directory holds the ingested corpus and trained models:
//!
//! ```text
//! workspace/
//!   tables/    entity-instance tables (key-value tables already transposed)
//!   models/    table-type.json, column-type.json, select.json, where.json
//!   reports/   evaluation output
//!   embeddings.vec   word vectors (optional)
//!   manifest.jsonl   question manifest (optional)
//! ```

mod corpus;
mod manifest;
mod metrics;
mod pipeline;
mod report;
mod training;

use thiserror::Error;

use crate::clauses::ClauseError;
use crate::embed::EmbedError;
use crate::nn::NnError;
use crate::query::QueryError;
use crate::retrieval::RetrievalError;
use crate::tabular::TableError;
use crate::typing::TypingError;

pub use corpus::{
    load_kind_labels, normalize_corpus, parse_kind_labels, Corpus, KindLabel, Workspace,
};
pub use manifest::{
    gold_clauses, load_manifest, parse_manifest, validate_manifest, GoldClauses, ManifestEntry,
    Split, ValidationFailure,
};
pub use metrics::{
    cell_prf, macro_average, metrics_from_confusion, BinaryMetrics, ConfusionMatrix, Prf,
};
pub use pipeline::{
    evaluate_pipeline, pipeline_sweep, run_pipeline, Candidates, ClausePredictor, Engine,
    OracleClauses, PipelineOutput, QuestionOutcome, RowMode, Scope, ScopeReport, Stage, StageError,
    SweepCell, TrainedClauses,
};
pub use report::{EvalReport, ReportFormat};
pub use training::{
    column_distributions, column_type_examples, evaluate_column_types, evaluate_retrieval,
    evaluate_select, evaluate_table_types, evaluate_where, select_examples, split_column_labels,
    table_type_examples, train_select, train_where, where_examples, Task, DEFAULT_UPSAMPLE,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{} manifest entr{} failed validation: {}", .0.len(), if .0.len() == 1 { "y" } else { "ies" }, summarize(.0))]
    Validation(Vec<ValidationFailure>),
    #[error("manifest line {line}: {reason}")]
    ManifestSyntax { line: usize, reason: String },
    #[error("all confusion counts are zero")]
    AllZero,
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error("duplicate table id {0:?}")]
    DuplicateTable(String),
    #[error("label file line {line}: {reason}")]
    BadLabel { line: usize, reason: String },
    #[error("no examples to train or evaluate on")]
    NoExamples,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Clause(#[from] ClauseError),
    #[error(transparent)]
    Typing(#[from] TypingError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

fn summarize(failures: &[ValidationFailure]) -> String {
    let mut parts: Vec<String> = failures.iter().take(3).map(|f| f.to_string()).collect();
    if failures.len() > 3 {
        parts.push(format!("and {} more", failures.len() - 3));
    }
    parts.join("; ")
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> HarnessError {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
