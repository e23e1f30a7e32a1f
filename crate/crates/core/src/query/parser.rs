//! Tokenizer and recursive-descent parser for the query mini-grammar:
//!
//! ```text
//! SELECT col [, col]* FROM id
//!   [WHERE col (~ | LIKE | = | > | <) 'kw' [AND ...]]
//!   [ORDER BY col [ASC | DESC]]
//!   [LIMIT n]
//! ```
//!
//! Identifiers are bare (`[A-Za-z0-9_][A-Za-z0-9_.-]*`) or double-quoted
//! with `""` as the escaped quote. Keywords are single-quoted with `''` as
//! the escaped quote; a bare number is accepted as a keyword too.

use super::{Condition, Direction, Op, OrderBy, QueryError, StructuredQuery};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Str(String),
    Comma,
    Tilde,
    Eq,
    Gt,
    Lt,
    LParen,
    RParen,
    Star,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn is_word_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let simple = match c {
            ',' => Some(Tok::Comma),
            '~' => Some(Tok::Tilde),
            '=' => Some(Tok::Eq),
            '>' => Some(Tok::Gt),
            '<' => Some(Tok::Lt),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(tok) = simple {
            chars.next();
            out.push(Spanned { tok, pos });
            continue;
        }
        if c == '"' || c == '\'' {
            chars.next();
            let mut s = String::new();
            let mut closed = false;
            while let Some((_, d)) = chars.next() {
                if d == c {
                    if chars.peek().is_some_and(|&(_, e)| e == c) {
                        chars.next();
                        s.push(c);
                    } else {
                        closed = true;
                        break;
                    }
                } else {
                    s.push(d);
                }
            }
            if !closed {
                return Err(QueryError::Syntax {
                    position: pos,
                    message: "unterminated quoted text".into(),
                });
            }
            let tok = if c == '"' {
                Tok::Quoted(s)
            } else {
                Tok::Str(s)
            };
            out.push(Spanned { tok, pos });
            continue;
        }
        if is_word_start(c) {
            let mut s = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if !is_word_char(d) {
                    break;
                }
                s.push(d);
                chars.next();
            }
            out.push(Spanned {
                tok: Tok::Word(s),
                pos,
            });
            continue;
        }
        return Err(QueryError::Syntax {
            position: pos,
            message: format!("unexpected character {c:?}"),
        });
    }
    Ok(out)
}

const RESERVED: &[&str] = &[
    "select",
    "from",
    "where",
    "and",
    "or",
    "order",
    "by",
    "asc",
    "desc",
    "ascending",
    "descending",
    "limit",
    "like",
    "join",
    "group",
    "having",
];
const AGGREGATES: &[&str] = &["count", "sum", "avg", "min", "max"];

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|s| &s.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.at + offset).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |s| s.pos)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn unsupported<T>(&self, construct: &str) -> Result<T, QueryError> {
        Err(QueryError::UnsupportedConstruct {
            construct: construct.to_string(),
            position: self.pos(),
        })
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let hit = self.peek_keyword(kw);
        if hit {
            self.at += 1;
        }
        hit
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.syntax(format!("expected {}", kw.to_uppercase()))
        }
    }

    /// Flags constructs outside the grammar before they surface as
    /// ordinary syntax errors.
    fn check_unsupported(&self) -> Result<(), QueryError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let l = w.to_ascii_lowercase();
                let call = matches!(self.peek_at(1), Some(Tok::LParen));
                if call && AGGREGATES.contains(&l.as_str()) {
                    return self.unsupported("aggregate function");
                }
                if call && l == "external" {
                    return self.unsupported("EXTERNAL()");
                }
                match l.as_str() {
                    "join" => self.unsupported("JOIN"),
                    "or" => self.unsupported("OR"),
                    "group" | "having" => self.unsupported("grouping"),
                    _ => Ok(()),
                }
            }
            Some(Tok::LParen) => {
                if matches!(self.peek_at(1), Some(Tok::Word(w)) if w.eq_ignore_ascii_case("select"))
                {
                    self.unsupported("subquery")
                } else {
                    self.syntax("unexpected '('")
                }
            }
            _ => Ok(()),
        }
    }

    fn identifier(&mut self, what: &str) -> Result<String, QueryError> {
        self.check_unsupported()?;
        match self.peek().cloned() {
            Some(Tok::Quoted(s)) => {
                if s.is_empty() {
                    return self.syntax(format!("empty {what}"));
                }
                self.at += 1;
                Ok(s)
            }
            Some(Tok::Word(w)) if !RESERVED.contains(&w.to_ascii_lowercase().as_str()) => {
                self.at += 1;
                Ok(w)
            }
            _ => self.syntax(format!("expected {what}")),
        }
    }

    fn keyword_literal(&mut self) -> Result<String, QueryError> {
        self.check_unsupported()?;
        match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.at += 1;
                Ok(s)
            }
            Some(Tok::Word(w)) if w.parse::<f64>().is_ok() => {
                self.at += 1;
                Ok(w)
            }
            _ => self.syntax("expected quoted keyword"),
        }
    }

    fn operator(&mut self) -> Result<Op, QueryError> {
        self.check_unsupported()?;
        let op = match self.peek() {
            Some(Tok::Tilde) => Op::SimMatch,
            Some(Tok::Eq) => Op::Equals,
            Some(Tok::Gt) => Op::Greater,
            Some(Tok::Lt) => Op::Less,
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("like") => Op::Like,
            _ => return self.syntax("expected one of ~, LIKE, =, >, <"),
        };
        self.at += 1;
        Ok(op)
    }

    fn query(&mut self) -> Result<StructuredQuery, QueryError> {
        self.expect_keyword("select")?;
        let mut select = vec![self.identifier("column name")?];
        while matches!(self.peek(), Some(Tok::Comma)) {
            self.at += 1;
            select.push(self.identifier("column name")?);
        }
        self.check_unsupported()?;
        self.expect_keyword("from")?;
        let from_table = self.identifier("table id")?;

        let mut conditions = Vec::new();
        self.check_unsupported()?;
        if self.eat_keyword("where") {
            loop {
                let column = self.identifier("column name")?;
                let op = self.operator()?;
                let keyword = self.keyword_literal()?;
                conditions.push(Condition {
                    column,
                    op,
                    keyword,
                });
                self.check_unsupported()?;
                if !self.eat_keyword("and") {
                    break;
                }
            }
        }

        let mut order_by = None;
        self.check_unsupported()?;
        if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            let column = self.identifier("column name")?;
            let direction = if self.eat_keyword("desc") || self.eat_keyword("descending") {
                Direction::Desc
            } else {
                let _ = self.eat_keyword("asc") || self.eat_keyword("ascending");
                Direction::Asc
            };
            order_by = Some(OrderBy { column, direction });
        }

        let mut limit = None;
        if self.eat_keyword("limit") {
            match self.peek().cloned() {
                Some(Tok::Word(w)) => match w.parse::<usize>() {
                    Ok(n) if n > 0 => {
                        self.at += 1;
                        limit = Some(n);
                    }
                    _ => return self.syntax("LIMIT needs a positive integer"),
                },
                _ => return self.syntax("LIMIT needs a positive integer"),
            }
        }

        self.check_unsupported()?;
        if self.at < self.toks.len() {
            return self.syntax("unexpected trailing input");
        }
        Ok(StructuredQuery {
            select,
            from_table,
            conditions,
            order_by,
            limit,
        })
    }
}

pub(super) fn parse(text: &str) -> Result<StructuredQuery, QueryError> {
    let toks = lex(text)?;
    Parser {
        toks,
        at: 0,
        end: text.len(),
    }
    .query()
}
