//! Structured queries over a single table: the AST, a parser and
//! pretty-printer for the textual form, an executor with `~` semantics,
//! and the two row-selection strategies used by the pipeline.

mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{self, EmbeddingStore, SimMatchConfig};
use crate::tabular::Table;
use crate::textproc;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported construct {construct} at byte {position}")]
    UnsupportedConstruct { construct: String, position: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("cannot compare {value:?} in column {column:?} numerically")]
    NonNumericComparison { column: String, value: String },
    #[error("query targets table {expected:?} but was run on {got:?}")]
    TableMismatch { expected: String, got: String },
    #[error("cell ({row}, {col}) is outside a {n_rows}x{n_cols} table")]
    OutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    SimMatch,
    Like,
    Equals,
    Greater,
    Less,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::SimMatch => "~",
            Op::Like => "LIKE",
            Op::Equals => "=",
            Op::Greater => ">",
            Op::Less => "<",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub column: String,
    pub op: Op,
    pub keyword: String,
}

impl Condition {
    pub fn sim(column: impl Into<String>, keyword: impl Into<String>) -> Condition {
        Condition {
            column: column.into(),
            op: Op::SimMatch,
            keyword: keyword.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderBy {
    pub column: String,
    pub direction: Direction,
}

/// `SELECT .. FROM .. WHERE .. ORDER BY .. LIMIT ..` over one table. The
/// WHERE conditions form an implicit conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuredQuery {
    pub select: Vec<String>,
    pub from_table: String,
    pub conditions: Vec<Condition>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<usize>,
}

impl StructuredQuery {
    pub fn new(select: Vec<String>, from_table: impl Into<String>) -> StructuredQuery {
        StructuredQuery {
            select,
            from_table: from_table.into(),
            conditions: Vec::new(),
            order_by: None,
            limit: None,
        }
    }

    pub fn with_condition(mut self, c: Condition) -> StructuredQuery {
        self.conditions.push(c);
        self
    }
}

fn quote(s: &str, q: char) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        if c == q {
            out.push(q);
        }
        out.push(c);
    }
    out.push(q);
    out
}

/// Canonical text: identifiers double-quoted, keywords single-quoted,
/// reserved words upper-case.
impl fmt::Display for StructuredQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.select.iter().map(|c| quote(c, '"')).collect();
        write!(
            f,
            "SELECT {} FROM {}",
            cols.join(", "),
            quote(&self.from_table, '"')
        )?;
        for (i, c) in self.conditions.iter().enumerate() {
            let lead = if i == 0 { "WHERE" } else { "AND" };
            write!(
                f,
                " {lead} {} {} {}",
                quote(&c.column, '"'),
                c.op.symbol(),
                quote(&c.keyword, '\'')
            )?;
        }
        if let Some(o) = &self.order_by {
            let dir = match o.direction {
                Direction::Asc => "ASC",
                Direction::Desc => "DESC",
            };
            write!(f, " ORDER BY {} {dir}", quote(&o.column, '"'))?;
        }
        if let Some(n) = self.limit {
            write!(f, " LIMIT {n}")?;
        }
        Ok(())
    }
}

impl FromStr for StructuredQuery {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query(s)
    }
}

pub fn parse_query(text: &str) -> Result<StructuredQuery, QueryError> {
    parser::parse(text)
}

/// A set of `(row, column)` answer cells.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellSet(BTreeSet<(usize, usize)>);

impl CellSet {
    pub fn new() -> CellSet {
        CellSet::default()
    }

    pub fn insert(&mut self, row: usize, col: usize) -> bool {
        self.0.insert((row, col))
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.0.contains(&(row, col))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn intersection_len(&self, other: &CellSet) -> usize {
        self.0.intersection(&other.0).count()
    }

    pub fn rows(&self) -> BTreeSet<usize> {
        self.0.iter().map(|&(r, _)| r).collect()
    }

    pub fn columns(&self) -> BTreeSet<usize> {
        self.0.iter().map(|&(_, c)| c).collect()
    }
}

impl FromIterator<(usize, usize)> for CellSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        CellSet(iter.into_iter().collect())
    }
}

/// Parses a cell as a number after trimming, dropping thousands separators,
/// a leading currency symbol and a trailing percent sign.
pub fn parse_numeric(cell: &str) -> Option<f64> {
    let mut s = cell.trim();
    s = s.trim_start_matches(['$', '€', '£', '¥']);
    s = s.trim_end_matches('%').trim();
    let cleaned: String = s.chars().filter(|&c| c != ',').collect();
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn resolve(t: &Table, name: &str) -> Result<usize, QueryError> {
    t.column_index(name)
        .ok_or_else(|| QueryError::UnknownColumn(name.to_string()))
}

fn condition_holds(
    c: &Condition,
    cell: &str,
    store: &EmbeddingStore,
    cfg: &SimMatchConfig,
) -> Result<bool, QueryError> {
    let numeric = |v: &str| {
        parse_numeric(v).ok_or_else(|| QueryError::NonNumericComparison {
            column: c.column.clone(),
            value: v.to_string(),
        })
    };
    Ok(match c.op {
        Op::SimMatch => embed::sim_match(store, cfg, cell, &c.keyword),
        Op::Like => cell.to_lowercase().contains(&c.keyword.to_lowercase()),
        Op::Equals => cell == c.keyword,
        Op::Greater => numeric(cell)? > numeric(&c.keyword)?,
        Op::Less => numeric(cell)? < numeric(&c.keyword)?,
    })
}

/// Runs `q` against `t`: filter by every condition, stable-sort by the
/// ORDER BY column (numerically when every surviving cell parses as a
/// number, otherwise lexicographically), truncate to LIMIT, and return the
/// surviving rows crossed with the SELECT columns.
pub fn execute(
    q: &StructuredQuery,
    t: &Table,
    store: &EmbeddingStore,
    cfg: &SimMatchConfig,
) -> Result<CellSet, QueryError> {
    if q.from_table != t.id() {
        return Err(QueryError::TableMismatch {
            expected: q.from_table.clone(),
            got: t.id().to_string(),
        });
    }
    let select: Vec<usize> = q
        .select
        .iter()
        .map(|c| resolve(t, c))
        .collect::<Result<_, _>>()?;
    let conds: Vec<(usize, &Condition)> = q
        .conditions
        .iter()
        .map(|c| Ok((resolve(t, &c.column)?, c)))
        .collect::<Result<_, QueryError>>()?;

    let mut rows = Vec::new();
    'rows: for (r, row) in t.rows().iter().enumerate() {
        for &(col, c) in &conds {
            if !condition_holds(c, &row[col], store, cfg)? {
                continue 'rows;
            }
        }
        rows.push(r);
    }

    if let Some(o) = &q.order_by {
        let col = resolve(t, &o.column)?;
        let cell = |r: usize| t.rows()[r][col].as_str();
        let numeric = rows.iter().all(|&r| parse_numeric(cell(r)).is_some());
        let cmp = |a: &usize, b: &usize| {
            if numeric {
                let (x, y) = (parse_numeric(cell(*a)), parse_numeric(cell(*b)));
                x.unwrap_or(0.0).total_cmp(&y.unwrap_or(0.0))
            } else {
                cell(*a).cmp(cell(*b))
            }
        };
        match o.direction {
            Direction::Asc => rows.sort_by(cmp),
            Direction::Desc => rows.sort_by(|a, b| cmp(b, a)),
        }
    }
    if let Some(n) = q.limit {
        rows.truncate(n);
    }

    Ok(rows
        .iter()
        .flat_map(|&r| select.iter().map(move |&c| (r, c)))
        .collect())
}

/// Word-match row selection: each `(column, keyword)` pair awards one point
/// to every row whose cell in that column contains the keyword as a whole
/// token (case-insensitive). The highest-scoring rows win; no pairs selects
/// every row.
pub fn select_rows_word_match(t: &Table, pairs: &[(usize, String)]) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..t.n_rows()).collect();
    if pairs.is_empty() {
        return all;
    }
    let mut scores = vec![0usize; t.n_rows()];
    for (col, kw) in pairs {
        let kw_tokens = textproc::split_words(kw);
        if kw_tokens.is_empty() || *col >= t.n_columns() {
            continue;
        }
        for (r, row) in t.rows().iter().enumerate() {
            let cell_tokens = textproc::split_words(&row[*col]);
            if kw_tokens.iter().all(|k| cell_tokens.contains(k)) {
                scores[r] += 1;
            }
        }
    }
    let best = scores.iter().copied().max().unwrap_or(0);
    all.into_iter().filter(|&r| scores[r] == best).collect()
}

/// Embedding row selection: for each pair, a row's distance is the least
/// Euclidean distance between the keyword vector and any in-vocabulary
/// token of its cell. Rows at the global minimum over all pairs win. A pair
/// whose keyword is out of vocabulary adds no constraint; when no pair
/// yields a finite distance every row is returned.
pub fn select_rows_embedding(
    t: &Table,
    pairs: &[(usize, String)],
    store: &EmbeddingStore,
) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..t.n_rows()).collect();
    let mut best = f64::INFINITY;
    let mut winners = BTreeSet::new();
    for (col, kw) in pairs {
        if *col >= t.n_columns() {
            continue;
        }
        let kw_vecs: Vec<&[f64]> = textproc::split_words(kw)
            .iter()
            .filter_map(|k| store.get(k))
            .collect();
        if kw_vecs.is_empty() {
            continue;
        }
        for (r, row) in t.rows().iter().enumerate() {
            let d = textproc::split_words(&row[*col])
                .iter()
                .filter_map(|tok| store.get(tok))
                .flat_map(|v| kw_vecs.iter().map(move |k| embed::euclidean(v, k)))
                .fold(f64::INFINITY, f64::min);
            if d < best {
                best = d;
                winners.clear();
            }
            if d == best && d.is_finite() {
                winners.insert(r);
            }
        }
    }
    if winners.is_empty() {
        all
    } else {
        winners
    }
}

/// Every `(row, col)` pair of the two index sets.
pub fn intersect_cells(
    t: &Table,
    rows: &BTreeSet<usize>,
    cols: &BTreeSet<usize>,
) -> Result<CellSet, QueryError> {
    let oob = |row, col| QueryError::OutOfBounds {
        row,
        col,
        n_rows: t.n_rows(),
        n_cols: t.n_columns(),
    };
    if let Some(&r) = rows.iter().find(|&&r| r >= t.n_rows()) {
        return Err(oob(r, cols.first().copied().unwrap_or(0)));
    }
    if let Some(&c) = cols.iter().find(|&&c| c >= t.n_columns()) {
        return Err(oob(rows.first().copied().unwrap_or(0), c));
    }
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect())
}

#[cfg(test)]
mod tests;
