//! Tokenization, normalization and word-frequency analysis.
//!
//! A word is a maximal run of non-whitespace characters. Matching is done on
//! the normalized form: lowercased, with leading and trailing characters that
//! are neither letters nor digits removed. Tokens consisting only of
//! punctuation normalize to the empty string; they keep their position in the
//! token sequence but are never counted as words.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub raw: String,
    pub normalized: String,
    pub index: usize,
    /// Byte offsets into the source text, half-open.
    pub span: Range<usize>,
}

impl Token {
    pub fn is_word(&self) -> bool {
        !self.normalized.is_empty()
    }

    /// Length used for watermark symbols: Unicode scalar values of the
    /// normalized form.
    pub fn len(&self) -> usize {
        self.normalized.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }
}

pub fn normalize(raw: &str) -> String {
    let mut current = trim_to_alnum(&raw.to_lowercase()).to_owned();
    // Lowercasing can expose new edge characters (e.g. a combining mark
    // produced by a dotted capital I); iterate to a fixed point.
    loop {
        let next = trim_to_alnum(&current.to_lowercase()).to_owned();
        if next == current {
            return current;
        }
        current = next;
    }
}

fn trim_to_alnum(s: &str) -> &str {
    s.trim_matches(|c: char| !c.is_alphanumeric())
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (offset, ch) in text.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                push_token(&mut tokens, text, s..offset);
                start = None;
            }
            (false, None) => start = Some(offset),
            _ => {}
        }
    }
    if let Some(s) = start {
        push_token(&mut tokens, text, s..text.len());
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, text: &str, span: Range<usize>) {
    let raw = &text[span.clone()];
    tokens.push(Token {
        raw: raw.to_owned(),
        normalized: normalize(raw),
        index: tokens.len(),
        span,
    });
}

pub fn word_count(text: &str) -> usize {
    tokenize(text).iter().filter(|t| t.is_word()).count()
}

/// Occurrence counts keyed by normalized word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    entries: BTreeMap<String, usize>,
}

impl FrequencyTable {
    pub fn from_tokens(tokens: &[Token]) -> Self {
        let mut entries = BTreeMap::new();
        for token in tokens.iter().filter(|t| t.is_word()) {
            *entries.entry(token.normalized.clone()).or_insert(0) += 1;
        }
        FrequencyTable { entries }
    }

    pub fn get(&self, word: &str) -> usize {
        self.entries.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Entries by descending count, ties in lexicographic order.
    pub fn ranked(&self) -> Vec<(&str, usize)> {
        let mut ranked: Vec<_> = self.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked
    }

    /// Most frequent word; ties go to the lexicographically smallest.
    pub fn most_frequent(&self) -> Option<(&str, usize)> {
        // BTreeMap iterates in ascending key order, so keeping the first
        // strictly-greater count yields the smallest word among the maxima.
        self.iter().fold(None, |best, (w, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((w, c)),
        })
    }
}

pub fn frequency_table(text: &str) -> FrequencyTable {
    FrequencyTable::from_tokens(&tokenize(text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordMode {
    Auto,
    Explicit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordPolicy {
    pub mode: KeywordMode,
    pub min_count: usize,
}

impl KeywordPolicy {
    pub fn auto() -> Self {
        KeywordPolicy {
            mode: KeywordMode::Auto,
            min_count: 1,
        }
    }

    pub fn explicit(word: impl Into<String>) -> Self {
        KeywordPolicy {
            mode: KeywordMode::Explicit(word.into()),
            min_count: 1,
        }
    }

    pub fn with_min_count(mut self, min_count: usize) -> Self {
        self.min_count = min_count.max(1);
        self
    }
}

impl Default for KeywordPolicy {
    fn default() -> Self {
        KeywordPolicy::auto()
    }
}

pub fn select_keyword(text: &str, policy: &KeywordPolicy) -> Result<(String, usize)> {
    select_keyword_in(&frequency_table(text), policy)
}

pub fn select_keyword_in(table: &FrequencyTable, policy: &KeywordPolicy) -> Result<(String, usize)> {
    if table.is_empty() {
        return Err(Error::NoWords);
    }
    let (keyword, count) = match &policy.mode {
        KeywordMode::Auto => {
            let (w, c) = table.most_frequent().ok_or(Error::NoWords)?;
            (w.to_owned(), c)
        }
        KeywordMode::Explicit(word) => {
            if word.is_empty() || normalize(word) != *word {
                return Err(Error::InvalidKeyword {
                    keyword: word.clone(),
                });
            }
            match table.get(word) {
                0 => {
                    return Err(Error::ExplicitKeywordAbsent {
                        keyword: word.clone(),
                    })
                }
                c => (word.clone(), c),
            }
        }
    };
    if count < policy.min_count {
        return Err(Error::BelowMinCount {
            keyword,
            count,
            min_count: policy.min_count,
        });
    }
    Ok((keyword, count))
}
