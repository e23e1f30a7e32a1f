//! SELECT and WHERE clause prediction.
//!
//! A SELECT example is a (question, column) pair and a WHERE example a
//! (question, column, question word) triple; both are scored by a binary
//! MLP head over hand-built features.

mod tagger;

use std::collections::BTreeSet;
use std::ops::Range;

use thiserror::Error;

use crate::embed::{self, EmbeddingStore};
use crate::nn::{self, Mlp, MlpSpec, NnError, TrainConfig};
use crate::tabular::Table;
use crate::textproc;
use crate::typing::{self, ColumnType, ColumnTypeClassifier, QuestionType, TypingError};

pub use tagger::{
    heuristic_tags, tag_tokens, Dep, Ner, Pos, SidecarTags, TagProvider, TokenTags,
    DEP_RELATIONS_TXT, NER_TAGS_TXT, POS_TAGS_TXT,
};

#[derive(Debug, Error)]
pub enum ClauseError {
    #[error("clause model has not been trained")]
    UntrainedModel,
    #[error("sidecar tags for {id} cover {got} tokens, the tokenizer produced {expected}")]
    SidecarMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("no sidecar tags for question {0}")]
    SidecarMissing(String),
    #[error("sidecar line {line}: {reason}")]
    SidecarFormat { line: usize, reason: String },
    #[error("column {col} out of range for a {n_cols}-column table")]
    ColumnOutOfRange { col: usize, n_cols: usize },
    #[error(transparent)]
    Typing(#[from] TypingError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Header edit-distance features when the header or the question has no
/// content stems to compare.
pub const NO_HEADER_PAIR_DISTANCE: f64 = 10.0;

/// A question after tokenization, tagging and typing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionInfo {
    pub id: String,
    pub text: String,
    /// Lowercased tokens, stopwords kept.
    pub tokens: Vec<String>,
    pub tags: Vec<TokenTags>,
    pub qtype: QuestionType,
}

impl QuestionInfo {
    pub fn analyze(
        id: &str,
        text: &str,
        provider: &TagProvider,
    ) -> Result<QuestionInfo, ClauseError> {
        let (qtype, _) = typing::classify_question(text)?;
        let tokens = textproc::split_words(text);
        let tags = tag_tokens(id, text, provider)?;
        Ok(QuestionInfo {
            id: id.to_string(),
            text: text.to_string(),
            tokens,
            tags,
            qtype,
        })
    }

    /// Stems of the non-stopword tokens.
    pub fn content_stems(&self) -> Vec<String> {
        textproc::tokenize(&self.text, true).stems().to_vec()
    }

    /// Token positions eligible as WHERE keywords: the first occurrence of
    /// each distinct non-stopword token.
    pub fn candidate_words(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| !textproc::is_stopword(t) && seen.insert(t.as_str()))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Everything the featurizers read besides the column and word indices.
#[derive(Debug, Clone, Copy)]
pub struct ClauseContext<'a> {
    pub question: &'a QuestionInfo,
    pub table: &'a Table,
    /// Per-column distribution over the seven column types.
    pub column_types: &'a [[f64; 7]],
    pub store: &'a EmbeddingStore,
}

/// Softmax outputs of the column-type model for every column.
pub fn column_type_distributions(
    t: &Table,
    clf: &ColumnTypeClassifier,
) -> Result<Vec<[f64; 7]>, ClauseError> {
    (0..t.n_columns())
        .map(|c| Ok(clf.classify_column(t.column(c))?.1))
        .collect()
}

/// One-hot distributions from a table's own column-type annotations.
pub fn annotated_distributions(t: &Table) -> Option<Vec<[f64; 7]>> {
    t.column_types().map(|types| {
        types
            .iter()
            .map(|ty: &ColumnType| {
                let mut d = [0.0; 7];
                d[ty.index()] = 1.0;
                d
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectFeatures(pub [f64; 25]);

impl SelectFeatures {
    pub const DIM: usize = 25;
    pub const N_COLUMNS: usize = 0;
    pub const PROXIMITY: Range<usize> = 1..5;
    pub const COLUMN_TYPE: Range<usize> = 5..12;
    pub const QUESTION_TYPE: Range<usize> = 12..23;
    pub const HEADER_DISTANCE: Range<usize> = 23..25;

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhereFeatures(pub [f64; 77]);

impl WhereFeatures {
    pub const DIM: usize = 77;
    pub const MIN_EDIT_DISTANCE: usize = 0;
    pub const AVG_CELL_LENGTH: usize = 1;
    pub const N_ROWS: usize = 2;
    pub const IN_SELECT: usize = 3;
    pub const COLUMN_TYPE: Range<usize> = 4..11;
    pub const QUESTION_TYPE: Range<usize> = 11..22;
    pub const POS: Range<usize> = 22..34;
    pub const NER: Range<usize> = 34..40;
    pub const DEP: Range<usize> = 40..77;

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn column_tokens(t: &Table, col: usize) -> BTreeSet<String> {
    t.column(col).flat_map(textproc::split_words).collect()
}

/// (average, maximum) cosine over in-vocabulary (cell token, question
/// token) pairs; zeros when no pair is defined.
fn proximity_stats<'a>(
    store: &EmbeddingStore,
    cell_tokens: &BTreeSet<String>,
    question: impl Iterator<Item = &'a str>,
) -> (f64, f64) {
    let q_vecs: Vec<&[f64]> = question
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter_map(|w| store.get(w))
        .collect();
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut n = 0usize;
    for c in cell_tokens.iter().filter_map(|w| store.get(w)) {
        for q in &q_vecs {
            let s = embed::cosine(c, q);
            sum += s;
            max = max.max(s);
            n += 1;
        }
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (sum / n as f64, max)
    }
}

fn check_column(t: &Table, col: usize) -> Result<(), ClauseError> {
    if col < t.n_columns() {
        Ok(())
    } else {
        Err(ClauseError::ColumnOutOfRange {
            col,
            n_cols: t.n_columns(),
        })
    }
}

/// The 25 SELECT features for column `col`.
pub fn featurize_select(
    ctx: &ClauseContext<'_>,
    col: usize,
) -> Result<SelectFeatures, ClauseError> {
    let t = ctx.table;
    check_column(t, col)?;
    let mut f = [0.0; SelectFeatures::DIM];
    f[SelectFeatures::N_COLUMNS] = t.n_columns() as f64;

    let cells = column_tokens(t, col);
    let q = &ctx.question.tokens;
    let (avg, max) = proximity_stats(ctx.store, &cells, q.iter().map(String::as_str));
    let (avg_c, max_c) = proximity_stats(
        ctx.store,
        &cells,
        q.iter()
            .map(String::as_str)
            .filter(|w| !textproc::is_stopword(w)),
    );
    f[SelectFeatures::PROXIMITY].copy_from_slice(&[avg, avg_c, max, max_c]);

    f[SelectFeatures::COLUMN_TYPE].copy_from_slice(&ctx.column_types[col]);
    f[SelectFeatures::QUESTION_TYPE].copy_from_slice(&ctx.question.qtype.one_hot());

    let header = textproc::tokenize(&t.headers()[col], true);
    let q_stems = ctx.question.content_stems();
    let mut dists: Vec<usize> = header
        .stems()
        .iter()
        .flat_map(|h| q_stems.iter().map(move |s| textproc::edit_distance(h, s)))
        .collect();
    dists.sort_unstable();
    let (d1, d2) = match dists.as_slice() {
        [] => (NO_HEADER_PAIR_DISTANCE, NO_HEADER_PAIR_DISTANCE),
        [only] => (*only as f64, *only as f64),
        [a, b, ..] => (*a as f64, *b as f64),
    };
    f[SelectFeatures::HEADER_DISTANCE].copy_from_slice(&[d1, d2]);
    Ok(SelectFeatures(f))
}

/// The 77 WHERE features for column `col` and question token `word`.
/// `select` is the gold SELECT set during training and the predicted one
/// at inference.
pub fn featurize_where(
    ctx: &ClauseContext<'_>,
    col: usize,
    word: usize,
    select: &BTreeSet<usize>,
) -> Result<WhereFeatures, ClauseError> {
    let t = ctx.table;
    check_column(t, col)?;
    let q = ctx.question;
    let w = &q.tokens[word];
    let mut f = [0.0; WhereFeatures::DIM];

    f[WhereFeatures::MIN_EDIT_DISTANCE] = column_tokens(t, col)
        .iter()
        .map(|c| textproc::normalized_edit_distance(w, c).expect("tokens are non-empty"))
        .fold(1.0, f64::min);
    let lengths: Vec<usize> = t
        .column(col)
        .map(|c| c.trim().chars().count())
        .filter(|&n| n > 0)
        .collect();
    if !lengths.is_empty() {
        f[WhereFeatures::AVG_CELL_LENGTH] =
            lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
    }
    f[WhereFeatures::N_ROWS] = t.n_rows() as f64;
    f[WhereFeatures::IN_SELECT] = f64::from(u8::from(select.contains(&col)));
    f[WhereFeatures::COLUMN_TYPE].copy_from_slice(&ctx.column_types[col]);
    f[WhereFeatures::QUESTION_TYPE].copy_from_slice(&q.qtype.one_hot());

    let tags = q.tags[word];
    f[WhereFeatures::POS.start + tags.pos.index()] = 1.0;
    f[WhereFeatures::NER.start + tags.ner.index()] = 1.0;
    f[WhereFeatures::DEP.start + tags.dep.index()] = 1.0;
    Ok(WhereFeatures(f))
}

fn check_binary(model: &Mlp, input_dim: usize) -> Result<(), ClauseError> {
    if model.spec().input_dim != input_dim || model.classes() != 2 {
        return Err(ClauseError::Nn(NnError::InvalidSpec(format!(
            "expected a {input_dim} -> 2 model, got {}",
            model.spec()
        ))));
    }
    Ok(())
}

fn to_samples(rows: impl Iterator<Item = (Vec<f64>, bool)>) -> Vec<(Vec<f64>, usize)> {
    rows.map(|(x, y)| (x, usize::from(y))).collect()
}

/// Binary SELECT-membership head (25 -> 32 -> 16 -> 8 -> 2).
#[derive(Debug, Clone, Default)]
pub struct SelectClassifier {
    model: Option<Mlp>,
}

impl SelectClassifier {
    pub fn untrained() -> Self {
        SelectClassifier { model: None }
    }

    pub fn from_model(model: Mlp) -> Result<Self, ClauseError> {
        check_binary(&model, SelectFeatures::DIM)?;
        Ok(SelectClassifier { model: Some(model) })
    }

    pub fn model(&self) -> Option<&Mlp> {
        self.model.as_ref()
    }

    pub fn train(data: &[(SelectFeatures, bool)], cfg: &TrainConfig) -> Result<Self, ClauseError> {
        let samples = to_samples(data.iter().map(|(f, y)| (f.0.to_vec(), *y)));
        SelectClassifier::from_model(nn::train(&MlpSpec::select_head(), &samples, cfg)?)
    }

    /// `[p(negative), p(positive)]`.
    pub fn probabilities(&self, f: &SelectFeatures) -> Result<[f64; 2], ClauseError> {
        let m = self.model.as_ref().ok_or(ClauseError::UntrainedModel)?;
        let p = m.forward(&f.0)?;
        Ok([p[0], p[1]])
    }
}

/// Binary WHERE-pair head (77 -> 32 -> 16 -> 8 -> 2).
#[derive(Debug, Clone, Default)]
pub struct WhereClassifier {
    model: Option<Mlp>,
}

impl WhereClassifier {
    pub fn untrained() -> Self {
        WhereClassifier { model: None }
    }

    pub fn from_model(model: Mlp) -> Result<Self, ClauseError> {
        check_binary(&model, WhereFeatures::DIM)?;
        Ok(WhereClassifier { model: Some(model) })
    }

    pub fn model(&self) -> Option<&Mlp> {
        self.model.as_ref()
    }

    pub fn train(data: &[(WhereFeatures, bool)], cfg: &TrainConfig) -> Result<Self, ClauseError> {
        let samples = to_samples(data.iter().map(|(f, y)| (f.0.to_vec(), *y)));
        WhereClassifier::from_model(nn::train(&MlpSpec::where_head(), &samples, cfg)?)
    }

    pub fn probabilities(&self, f: &WhereFeatures) -> Result<[f64; 2], ClauseError> {
        let m = self.model.as_ref().ok_or(ClauseError::UntrainedModel)?;
        let p = m.forward(&f.0)?;
        Ok([p[0], p[1]])
    }
}

/// Columns whose head picks the positive class (argmax over the two
/// logits, ties negative). When none does, the column with the highest
/// positive probability is returned alone.
pub fn predict_select(
    ctx: &ClauseContext<'_>,
    model: &SelectClassifier,
) -> Result<BTreeSet<usize>, ClauseError> {
    let mut chosen = BTreeSet::new();
    let mut best: Option<(usize, f64)> = None;
    for col in 0..ctx.table.n_columns() {
        let [neg, pos] = model.probabilities(&featurize_select(ctx, col)?)?;
        if pos > neg {
            chosen.insert(col);
        }
        if best.is_none_or(|(_, b)| pos > b) {
            best = Some((col, pos));
        }
    }
    if chosen.is_empty() {
        if let Some((col, _)) = best {
            chosen.insert(col);
        }
    }
    Ok(chosen)
}

/// Every (column, keyword) pair the WHERE head accepts. Keywords are the
/// lowercased question tokens; the result may be empty.
pub fn predict_where(
    ctx: &ClauseContext<'_>,
    model: &WhereClassifier,
    select: &BTreeSet<usize>,
) -> Result<Vec<(usize, String)>, ClauseError> {
    if model.model.is_none() {
        return Err(ClauseError::UntrainedModel);
    }
    let mut out = Vec::new();
    for col in 0..ctx.table.n_columns() {
        for word in ctx.question.candidate_words() {
            let [neg, pos] = model.probabilities(&featurize_where(ctx, col, word, select)?)?;
            if pos > neg {
                out.push((col, ctx.question.tokens[word].clone()));
            }
        }
    }
    Ok(out)
}
