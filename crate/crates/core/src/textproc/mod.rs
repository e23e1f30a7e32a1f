//! Text normalization shared by every stage: tokenization, stop-word
//! removal, Porter stemming and Levenshtein distance.

mod porter;

use std::collections::HashSet;
use std::sync::OnceLock;

use thiserror::Error;

pub use porter::stem;

/// The embedded English stop list, one word per line.
pub const STOPWORDS_TXT: &str = include_str!("../../resources/stopwords.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("normalized edit distance is undefined for two empty strings")]
    BothEmpty,
}

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopword_set().contains(token)
}

pub fn stopwords() -> impl Iterator<Item = &'static str> {
    STOPWORDS_TXT
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
}

/// Lowercased tokens with their Porter stems, kept in lockstep.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenList {
    tokens: Vec<String>,
    stems: Vec<String>,
}

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn stems(&self) -> &[String] {
        &self.stems
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.tokens
            .iter()
            .zip(&self.stems)
            .map(|(t, s)| (t.as_str(), s.as_str()))
    }
}

/// Fragments split on every run of characters outside `[A-Za-z0-9]`, with
/// their original case.
pub fn split_surface(text: &str) -> Vec<&str> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Lowercased [`split_surface`] fragments.
pub fn split_words(text: &str) -> Vec<String> {
    split_surface(text)
        .into_iter()
        .map(str::to_ascii_lowercase)
        .collect()
}

pub fn tokenize(text: &str, drop_stopwords: bool) -> TokenList {
    let tokens: Vec<String> = split_words(text)
        .into_iter()
        .filter(|t| !drop_stopwords || !is_stopword(t))
        .collect();
    let stems = tokens.iter().map(|t| stem(t)).collect();
    TokenList { tokens, stems }
}

/// Unit-cost Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the longer string's length.
pub fn normalized_edit_distance(a: &str, b: &str) -> Result<f64, TextError> {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return Err(TextError::BothEmpty);
    }
    Ok(edit_distance(a, b) as f64 / longest as f64)
}
