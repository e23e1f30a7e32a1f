//! Question answering over web-extracted tables.
//!
//! A question is answered by building a structured query one clause at a
//! time: table-type recognition and key-value transposition, TF-IDF source
//! selection, a SELECT-column classifier, a WHERE (column, word) classifier,
//! row selection and answer-cell intersection. Each stage lives in its own
//! module; [`harness`] wires them together and scores the result.

pub mod clauses;
pub mod embed;
pub mod harness;
pub mod nn;
pub mod query;
pub mod retrieval;
pub mod tabular;
pub mod textproc;
pub mod typing;

pub use embed::{EmbeddingStore, SimMatchConfig};
pub use query::{CellSet, StructuredQuery};
pub use tabular::{Table, TableKind};
pub use typing::{ColumnType, QuestionType};
