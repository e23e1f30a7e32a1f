//! Column data-type recognition and rule-based question typing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{self, Mlp, MlpSpec, NnError, TrainConfig};
use crate::textproc;

#[derive(Debug, Error)]
pub enum TypingError {
    #[error("classifier is untrained")]
    UntrainedModel,
    #[error("question is empty")]
    EmptyQuestion,
    #[error("column labels line {line}: {reason}")]
    BadLabel { line: usize, reason: String },
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColumnType {
    DateTime,
    Currency,
    Percentage,
    Numerical,
    Boolean,
    Text,
    #[serde(rename = "URL")]
    Url,
}

impl ColumnType {
    pub const ALL: [ColumnType; 7] = [
        ColumnType::DateTime,
        ColumnType::Currency,
        ColumnType::Percentage,
        ColumnType::Numerical,
        ColumnType::Boolean,
        ColumnType::Text,
        ColumnType::Url,
    ];

    pub fn index(self) -> usize {
        ColumnType::ALL.iter().position(|t| *t == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<ColumnType> {
        ColumnType::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnType::DateTime => "DateTime",
            ColumnType::Currency => "Currency",
            ColumnType::Percentage => "Percentage",
            ColumnType::Numerical => "Numerical",
            ColumnType::Boolean => "Boolean",
            ColumnType::Text => "Text",
            ColumnType::Url => "URL",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColumnType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ColumnType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown column type {s:?}"))
    }
}

const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
    "jan",
    "feb",
    "mar",
    "apr",
    "jun",
    "jul",
    "aug",
    "sep",
    "sept",
    "oct",
    "nov",
    "dec",
];

const WEEKDAYS: &[&str] = &[
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
    "mon",
    "tue",
    "tues",
    "wed",
    "thu",
    "thur",
    "thurs",
    "fri",
    "sat",
    "sun",
];

const BOOLEAN_WORDS: &[&str] = &["yes", "no", "true", "false"];
const CURRENCY_SYMBOLS: &[char] = &['$', '€', '£', '¥'];
const CURRENCY_CODES: &[&str] = &["usd", "eur", "gbp"];

/// Nine cell proportions, each in `[0, 1]`, in this order: numeric parse,
/// digits only, currency, percent, boolean word, year 1500-2020, month,
/// weekday, `http`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnTypeFeatures(pub [f64; 9]);

impl ColumnTypeFeatures {
    pub const DIM: usize = 9;

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn parses_as_number(cell: &str) -> bool {
    let c = cell.trim();
    c.parse::<f64>().is_ok_and(f64::is_finite) && c.bytes().any(|b| b.is_ascii_digit())
}

fn only_digits(cell: &str) -> bool {
    let c = cell.trim();
    c.chars().any(|ch| ch.is_ascii_digit())
        && c.chars()
            .all(|ch| ch.is_ascii_digit() || ch == ',' || ch == '.')
}

fn has_currency(cell: &str, words: &[String]) -> bool {
    cell.contains(CURRENCY_SYMBOLS) || words.iter().any(|w| CURRENCY_CODES.contains(&w.as_str()))
}

fn has_year(words: &[String]) -> bool {
    words
        .iter()
        .any(|w| w.len() == 4 && w.parse::<u32>().is_ok_and(|y| (1500..=2020).contains(&y)))
}

fn has_word(words: &[String], list: &[&str]) -> bool {
    words.iter().any(|w| list.contains(&w.as_str()))
}

/// Proportions over the non-empty cells; an empty column is all zeros.
pub fn extract_column_type_features<'a, I>(cells: I) -> ColumnTypeFeatures
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts = [0usize; 9];
    let mut n = 0usize;
    for cell in cells.into_iter().filter(|c| !c.trim().is_empty()) {
        n += 1;
        let words = textproc::split_words(cell);
        let flags = [
            parses_as_number(cell),
            only_digits(cell),
            has_currency(cell, &words),
            cell.contains('%'),
            has_word(&words, BOOLEAN_WORDS),
            has_year(&words),
            has_word(&words, MONTHS),
            has_word(&words, WEEKDAYS),
            cell.to_ascii_lowercase().contains("http"),
        ];
        for (c, f) in counts.iter_mut().zip(flags) {
            *c += usize::from(f);
        }
    }
    let mut out = [0.0; 9];
    if n > 0 {
        for (o, c) in out.iter_mut().zip(counts) {
            *o = c as f64 / n as f64;
        }
    }
    ColumnTypeFeatures(out)
}

/// The 9 -> 32 -> 32 -> 7 softmax column-type model.
#[derive(Debug, Clone, Default)]
pub struct ColumnTypeClassifier {
    model: Option<Mlp>,
}

impl ColumnTypeClassifier {
    pub fn untrained() -> Self {
        ColumnTypeClassifier { model: None }
    }

    pub fn from_model(model: Mlp) -> Result<Self, TypingError> {
        if model.spec().input_dim != ColumnTypeFeatures::DIM || model.classes() != 7 {
            return Err(TypingError::Nn(NnError::InvalidSpec(format!(
                "column-type model must be 9 -> 7, got {}",
                model.spec()
            ))));
        }
        Ok(ColumnTypeClassifier { model: Some(model) })
    }

    pub fn model(&self) -> Option<&Mlp> {
        self.model.as_ref()
    }

    pub fn train(
        data: &[(ColumnTypeFeatures, ColumnType)],
        cfg: &TrainConfig,
    ) -> Result<Self, TypingError> {
        let samples: Vec<(Vec<f64>, usize)> = data
            .iter()
            .map(|(f, t)| (f.0.to_vec(), t.index()))
            .collect();
        let model = nn::train(&MlpSpec::column_type_head(), &samples, cfg)?;
        ColumnTypeClassifier::from_model(model)
    }

    /// Argmax type plus the full 7-way distribution.
    pub fn classify(&self, f: &ColumnTypeFeatures) -> Result<(ColumnType, [f64; 7]), TypingError> {
        let model = self.model.as_ref().ok_or(TypingError::UntrainedModel)?;
        let p = model.forward(&f.0)?;
        let mut dist = [0.0; 7];
        dist.copy_from_slice(&p);
        let best = ColumnType::from_index(nn::argmax(&p)).expect("7 classes");
        Ok((best, dist))
    }

    pub fn classify_column<'a, I>(&self, cells: I) -> Result<(ColumnType, [f64; 7]), TypingError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        self.classify(&extract_column_type_features(cells))
    }
}

pub fn classify_column_type(
    f: &ColumnTypeFeatures,
    m: &ColumnTypeClassifier,
) -> Result<(ColumnType, [f64; 7]), TypingError> {
    m.classify(f)
}

/// One labeled column: `(table id, column index, type)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnLabel {
    pub table: String,
    pub column: usize,
    pub column_type: ColumnType,
}

/// Parses tab-separated `table<TAB>column<TAB>Type` lines; `#` starts a comment.
pub fn parse_column_labels(text: &str) -> Result<Vec<ColumnLabel>, TypingError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| TypingError::BadLabel {
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [table, column, ty] = fields[..] else {
            return Err(bad(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        };
        out.push(ColumnLabel {
            table: table.to_string(),
            column: column
                .parse()
                .map_err(|e| bad(format!("column index: {e}")))?,
            column_type: ty.parse().map_err(bad)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionType {
    Abbreviation,
    Entity,
    Description,
    Human,
    Location,
    Numeric,
    YesNo,
    NumericDate,
    NumericCount,
    NumericPeriod,
    NumericMoney,
}

impl QuestionType {
    pub const ALL: [QuestionType; 11] = [
        QuestionType::Abbreviation,
        QuestionType::Entity,
        QuestionType::Description,
        QuestionType::Human,
        QuestionType::Location,
        QuestionType::Numeric,
        QuestionType::YesNo,
        QuestionType::NumericDate,
        QuestionType::NumericCount,
        QuestionType::NumericPeriod,
        QuestionType::NumericMoney,
    ];

    pub fn index(self) -> usize {
        QuestionType::ALL.iter().position(|t| *t == self).unwrap()
    }

    pub fn one_hot(self) -> [f64; 11] {
        let mut v = [0.0; 11];
        v[self.index()] = 1.0;
        v
    }
}

const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "am", "do", "does", "did", "can", "could", "will", "would",
    "should", "shall", "has", "have", "had", "may", "might", "must",
];
const MONEY_CUES: &[&str] = &[
    "cost", "costs", "price", "prices", "priced", "pay", "paid", "dollars", "dollar", "money",
    "worth", "salary", "fee", "fare", "earn", "earns", "spend",
];
const MEASURE_ADJECTIVES: &[&str] = &[
    "old", "tall", "far", "high", "big", "large", "fast", "heavy", "deep", "wide", "hot", "cold",
];

fn followed_by(words: &[String], first: &str, next: &[&str]) -> bool {
    words
        .windows(2)
        .any(|w| w[0] == first && next.contains(&w[1].as_str()))
}

/// Deterministic rule cascade; the first matching rule wins.
pub fn classify_question(question: &str) -> Result<(QuestionType, [f64; 11]), TypingError> {
    let words = textproc::split_words(question);
    if words.is_empty() {
        return Err(TypingError::EmptyQuestion);
    }
    let has = |w: &str| words.iter().any(|x| x == w);
    let qt = if AUXILIARIES.contains(&words[0].as_str()) {
        QuestionType::YesNo
    } else if has("who") || has("whose") || has("whom") {
        QuestionType::Human
    } else if has("where") {
        QuestionType::Location
    } else if has("when")
        || followed_by(&words, "what", &["year", "day", "date", "month", "time"])
        || followed_by(&words, "which", &["year", "day", "date", "month"])
    {
        QuestionType::NumericDate
    } else if followed_by(&words, "how", &["many"]) {
        QuestionType::NumericCount
    } else if followed_by(&words, "how", &["long"]) {
        QuestionType::NumericPeriod
    } else if (followed_by(&words, "how", &["much"]) && has_word(&words, MONEY_CUES))
        || has_word(&words, &["cost", "costs", "price", "prices"])
    {
        QuestionType::NumericMoney
    } else if followed_by(&words, "how", &["much"])
        || followed_by(&words, "how", MEASURE_ADJECTIVES)
    {
        QuestionType::Numeric
    } else if has("stand") && followed_by(&words, "stand", &["for"])
        || has("stands") && followed_by(&words, "stands", &["for"])
        || has("abbreviation")
        || has("acronym")
    {
        QuestionType::Abbreviation
    } else if has("how") || has("why") {
        QuestionType::Description
    } else {
        QuestionType::Entity
    };
    Ok((qt, qt.one_hot()))
}
