//! Watermark generation, extraction and comparison.
//!
//! A watermark records, for every occurrence of the keyword in token order,
//! the length of the preceding token and the length of the following token.
//! The text itself is never modified. Verification regenerates the watermark
//! from the (possibly tampered) text and compares it with the registered one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{normalize, tokenize, Token};

/// Lengths of the words on either side of one keyword occurrence.
/// Serialized as a two-element array `[prev, next]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NeighborLengths(pub u32, pub u32);

impl NeighborLengths {
    pub fn prev(self) -> u32 {
        self.0
    }

    pub fn next(self) -> u32 {
        self.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WatermarkRepr")]
pub struct Watermark {
    keyword: String,
    kw_count: usize,
    pairs: Vec<NeighborLengths>,
}

#[derive(Deserialize)]
struct WatermarkRepr {
    keyword: String,
    kw_count: usize,
    pairs: Vec<NeighborLengths>,
}

impl TryFrom<WatermarkRepr> for Watermark {
    type Error = Error;

    fn try_from(repr: WatermarkRepr) -> Result<Self> {
        if repr.kw_count != repr.pairs.len() {
            return Err(Error::MalformedWatermark(format!(
                "kw_count {} does not match {} pairs",
                repr.kw_count,
                repr.pairs.len()
            )));
        }
        Watermark::from_pairs(repr.keyword, repr.pairs)
    }
}

impl Watermark {
    pub fn from_pairs(keyword: impl Into<String>, pairs: Vec<NeighborLengths>) -> Result<Self> {
        let keyword = keyword.into();
        if keyword.is_empty() || normalize(&keyword) != keyword {
            return Err(Error::InvalidKeyword { keyword });
        }
        Ok(Watermark {
            keyword,
            kw_count: pairs.len(),
            pairs,
        })
    }

    pub fn keyword(&self) -> &str {
        &self.keyword
    }

    pub fn kw_count(&self) -> usize {
        self.kw_count
    }

    pub fn pairs(&self) -> &[NeighborLengths] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Flattened symbol sequence `p1, n1, p2, n2, ...`; always `2 * kw_count` long.
    pub fn symbols(&self) -> Vec<u32> {
        self.pairs.iter().flat_map(|p| [p.0, p.1]).collect()
    }

    /// Decimal rendering of every length, concatenated without separators.
    /// Lossy once a length reaches two digits.
    pub fn digit_string(&self) -> String {
        self.symbols().iter().map(u32::to_string).collect()
    }

    fn empty(keyword: &str) -> Self {
        Watermark {
            keyword: keyword.to_owned(),
            kw_count: 0,
            pairs: Vec::new(),
        }
    }
}

/// A watermark supplied by a caller alongside a keyword: either just the
/// pairs (`[[4,1],[4,3]]`) or a full watermark object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WatermarkInput {
    Pairs(Vec<NeighborLengths>),
    Full(Watermark),
}

impl WatermarkInput {
    pub fn into_watermark(self, keyword: &str) -> Result<Watermark> {
        match self {
            WatermarkInput::Pairs(pairs) => Watermark::from_pairs(keyword, pairs),
            WatermarkInput::Full(wm) if wm.keyword == keyword => Ok(wm),
            WatermarkInput::Full(wm) => Err(Error::KeywordMismatch {
                original: keyword.to_owned(),
                extracted: wm.keyword,
            }),
        }
    }
}

fn check_keyword(keyword: &str) -> Result<()> {
    if keyword.is_empty() || normalize(keyword) != keyword {
        return Err(Error::InvalidKeyword {
            keyword: keyword.to_owned(),
        });
    }
    Ok(())
}

pub fn generate(text: &str, keyword: &str) -> Result<Watermark> {
    generate_from_tokens(&tokenize(text), keyword)
}

pub fn generate_from_tokens(tokens: &[Token], keyword: &str) -> Result<Watermark> {
    check_keyword(keyword)?;
    let neighbor_len = |i: Option<usize>| -> u32 {
        i.and_then(|i| tokens.get(i)).map_or(0, |t| t.len() as u32)
    };
    let pairs: Vec<_> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.normalized == keyword)
        .map(|(i, _)| NeighborLengths(neighbor_len(i.checked_sub(1)), neighbor_len(Some(i + 1))))
        .collect();
    if pairs.is_empty() {
        return Err(Error::KeywordAbsent {
            keyword: keyword.to_owned(),
        });
    }
    Ok(Watermark {
        keyword: keyword.to_owned(),
        kw_count: pairs.len(),
        pairs,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    /// Flattened length symbols compared index by index.
    #[default]
    PositionalSymbol,
    /// Digit-string renderings compared character by character.
    PositionalDigit,
    /// Longest common subsequence of the flattened symbols.
    LcsSymbol,
}

impl CompareMode {
    pub const ALL: [CompareMode; 3] = [
        CompareMode::PositionalSymbol,
        CompareMode::PositionalDigit,
        CompareMode::LcsSymbol,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompareMode::PositionalSymbol => "positional_symbol",
            CompareMode::PositionalDigit => "positional_digit",
            CompareMode::LcsSymbol => "lcs_symbol",
        }
    }
}

impl fmt::Display for CompareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompareMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CompareMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown comparison mode {s:?} (expected positional_symbol, positional_digit or lcs_symbol)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub war: f64,
    pub wdr: f64,
    pub equal: bool,
    pub mode: CompareMode,
    /// Numerator of `war`.
    pub matched: usize,
    /// Denominator of `war`: the original's symbol (or digit) count.
    pub total: usize,
}

pub fn compare(original: &Watermark, extracted: &Watermark, mode: CompareMode) -> Result<Comparison> {
    if original.keyword != extracted.keyword {
        return Err(Error::KeywordMismatch {
            original: original.keyword.clone(),
            extracted: extracted.keyword.clone(),
        });
    }
    if original.is_empty() {
        return Err(Error::EmptyOriginal);
    }
    let (matched, total) = match mode {
        CompareMode::PositionalSymbol => {
            let (a, b) = (original.symbols(), extracted.symbols());
            (positional_matches(&a, &b), a.len())
        }
        CompareMode::PositionalDigit => {
            let (a, b) = (original.digit_string(), extracted.digit_string());
            (positional_matches(a.as_bytes(), b.as_bytes()), a.len())
        }
        CompareMode::LcsSymbol => {
            let (a, b) = (original.symbols(), extracted.symbols());
            (lcs_len(&a, &b), a.len())
        }
    };
    // The denominator is the original's length, so an extracted watermark
    // longer than the original can never push the matched count past it.
    debug_assert!(matched <= total);
    let war = matched as f64 / total as f64;
    Ok(Comparison {
        war,
        wdr: 1.0 - war,
        equal: original.pairs == extracted.pairs,
        mode,
        matched,
        total,
    })
}

fn positional_matches<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

/// Length of the longest common subsequence, two-row DP.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub keyword: String,
    pub tampered: bool,
    #[serde(flatten)]
    pub comparison: Comparison,
    pub kw_count_original: usize,
    pub kw_count_observed: usize,
}

/// Regenerates the watermark from `text` and compares it with `original`.
/// A keyword that no longer occurs yields an empty extracted watermark.
pub fn extract_and_verify(text: &str, original: &Watermark, mode: CompareMode) -> Result<VerificationResult> {
    verify_tokens(&tokenize(text), original, mode)
}

pub fn verify_tokens(tokens: &[Token], original: &Watermark, mode: CompareMode) -> Result<VerificationResult> {
    let extracted = match generate_from_tokens(tokens, &original.keyword) {
        Ok(wm) => wm,
        Err(Error::KeywordAbsent { .. }) => Watermark::empty(&original.keyword),
        Err(e) => return Err(e),
    };
    let comparison = compare(original, &extracted, mode)?;
    Ok(VerificationResult {
        keyword: original.keyword.clone(),
        tampered: !comparison.equal,
        kw_count_original: original.kw_count,
        kw_count_observed: extracted.kw_count,
        comparison,
    })
}
