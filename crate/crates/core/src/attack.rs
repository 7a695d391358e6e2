//! Seeded tampering attacks: word insertion, deletion and transposition.
//!
//! Given a text of `n` words the attack performs `round(insert_ratio * n)`
//! insertions at uniformly random word boundaries, then
//! `round(delete_ratio * n)` deletions of distinct surviving words, then
//! `round(reorder_ratio * n / 2)` random transpositions. Every random choice
//! comes from a ChaCha8 stream seeded with `AttackSpec::seed`, so an attack is
//! reproducible bit for bit.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{normalize, tokenize, Token};

/// Identifier of the generator behind every attack, recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    #[serde(default)]
    pub insert_ratio: f64,
    #[serde(default)]
    pub delete_ratio: f64,
    #[serde(default)]
    pub reorder_ratio: f64,
    #[serde(default)]
    pub seed: u64,
    /// Words to draw insertions from; defaults to the document's own words.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<Vec<String>>,
}

impl AttackSpec {
    pub fn new(insert_ratio: f64, delete_ratio: f64, reorder_ratio: f64, seed: u64) -> Self {
        AttackSpec {
            insert_ratio,
            delete_ratio,
            reorder_ratio,
            seed,
            lexicon: None,
        }
    }

    pub fn null() -> Self {
        Self::new(0.0, 0.0, 0.0, 0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, max: Option<f64>| {
            if !v.is_finite() || v < 0.0 || max.is_some_and(|m| v > m) {
                let range = max.map_or("finite and >= 0".to_owned(), |m| format!("in [0, {m}]"));
                return Err(Error::InvalidAttackSpec(format!("{name} = {v} must be {range}")));
            }
            Ok(())
        };
        check("insert_ratio", self.insert_ratio, None)?;
        check("delete_ratio", self.delete_ratio, Some(1.0))?;
        check("reorder_ratio", self.reorder_ratio, Some(1.0))
    }

    /// Edit counts `(insertions, deletions, transpositions)` for `n` words.
    pub fn edit_counts(&self, n: usize) -> (usize, usize, usize) {
        let n = n as f64;
        (
            (self.insert_ratio * n).round() as usize,
            (self.delete_ratio * n).round() as usize,
            (self.reorder_ratio * n / 2.0).round() as usize,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    pub inserted: usize,
    pub deleted: usize,
    pub transpositions: usize,
    pub wc_before: usize,
    pub wc_after: usize,
    /// Edits on, or adjacent to, an occurrence of the instrumented keyword.
    pub neighborhood_hits: usize,
    pub rng: String,
}

/// Returns the attacked text (surviving tokens joined by single spaces) and
/// a report of what was done.
pub fn attack(text: &str, spec: &AttackSpec, instrument_keyword: Option<&str>) -> Result<(String, AttackReport)> {
    attack_tokens(&tokenize(text), spec, instrument_keyword)
}

pub fn attack_tokens(tokens: &[Token], spec: &AttackSpec, instrument_keyword: Option<&str>) -> Result<(String, AttackReport)> {
    spec.validate()?;
    let n = tokens.iter().filter(|t| t.is_word()).count();
    if n == 0 {
        return Err(Error::EmptyText);
    }
    let (k_insert, k_delete, k_reorder) = spec.edit_counts(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let keyword = instrument_keyword.filter(|k| !k.is_empty());
    let mut hits = 0;

    let mut seq: Vec<Slot> = tokens
        .iter()
        .map(|t| Slot {
            raw: t.raw.clone(),
            normalized: t.normalized.clone(),
        })
        .collect();
    let is_kw = |s: &Slot| keyword.is_some_and(|k| s.normalized == k);

    if k_insert > 0 {
        let lexicon = insertion_lexicon(tokens, spec.lexicon.as_deref())?;
        // gaps[b] = words inserted before seq[b]; gap seq.len() is the end.
        let mut gaps: Vec<Vec<Slot>> = vec![Vec::new(); seq.len() + 1];
        for _ in 0..k_insert {
            let gap = rng.random_range(0..=seq.len());
            let word = lexicon[rng.random_range(0..lexicon.len())].clone();
            let touches = is_kw(&word)
                || (gap > 0 && is_kw(&seq[gap - 1]))
                || seq.get(gap).is_some_and(&is_kw);
            hits += usize::from(touches);
            gaps[gap].push(word);
        }
        let mut merged = Vec::with_capacity(seq.len() + k_insert);
        let mut gaps = gaps.into_iter();
        for slot in seq {
            merged.extend(gaps.next().expect("one gap per slot"));
            merged.push(slot);
        }
        merged.extend(gaps.next().expect("trailing gap"));
        seq = merged;
    }

    if k_delete > 0 {
        let word_positions: Vec<usize> = (0..seq.len()).filter(|&i| seq[i].is_word()).collect();
        if k_delete > word_positions.len() {
            return Err(Error::DeleteExceedsText {
                requested: k_delete,
                available: word_positions.len(),
            });
        }
        let mut doomed = vec![false; seq.len()];
        for pick in index::sample(&mut rng, word_positions.len(), k_delete) {
            let p = word_positions[pick];
            doomed[p] = true;
            if touches_keyword(&seq, p, &is_kw) {
                hits += 1;
            }
        }
        let mut doomed = doomed.into_iter();
        seq.retain(|_| !doomed.next().expect("one flag per slot"));
    }

    let mut transpositions = 0;
    let word_positions: Vec<usize> = (0..seq.len()).filter(|&i| seq[i].is_word()).collect();
    if word_positions.len() >= 2 {
        for _ in 0..k_reorder {
            let picks = index::sample(&mut rng, word_positions.len(), 2);
            let (a, b) = (word_positions[picks.index(0)], word_positions[picks.index(1)]);
            if seq[a].normalized != seq[b].normalized && (touches_keyword(&seq, a, &is_kw) || touches_keyword(&seq, b, &is_kw)) {
                hits += 1;
            }
            seq.swap(a, b);
            transpositions += 1;
        }
    }

    let attacked = seq.iter().map(|s| s.raw.as_str()).collect::<Vec<_>>().join(" ");
    let report = AttackReport {
        inserted: k_insert,
        deleted: k_delete,
        transpositions,
        wc_before: n,
        wc_after: n + k_insert - k_delete,
        neighborhood_hits: if keyword.is_some() { hits } else { 0 },
        rng: RNG_ALGORITHM.to_owned(),
    };
    Ok((attacked, report))
}

/// Applies every spec to the same original text; failures are kept in place.
pub fn attack_suite(text: &str, specs: &[AttackSpec]) -> Vec<Result<(String, AttackReport)>> {
    let tokens = tokenize(text);
    specs.iter().map(|spec| attack_tokens(&tokens, spec, None)).collect()
}

#[derive(Debug, Clone)]
struct Slot {
    raw: String,
    normalized: String,
}

impl Slot {
    fn is_word(&self) -> bool {
        !self.normalized.is_empty()
    }
}

fn touches_keyword(seq: &[Slot], p: usize, is_kw: &impl Fn(&Slot) -> bool) -> bool {
    let lo = p.saturating_sub(1);
    let hi = (p + 1).min(seq.len() - 1);
    seq[lo..=hi].iter().any(is_kw)
}

fn insertion_lexicon(tokens: &[Token], custom: Option<&[String]>) -> Result<Vec<Slot>> {
    let words: Vec<Slot> = match custom {
        Some(list) => list
            .iter()
            .flat_map(|entry| entry.split_whitespace())
            .map(|w| Slot {
                raw: w.to_owned(),
                normalized: normalize(w),
            })
            .filter(Slot::is_word)
            .collect(),
        None => tokens
            .iter()
            .filter(|t| t.is_word())
            .map(|t| Slot {
                raw: t.raw.clone(),
                normalized: t.normalized.clone(),
            })
            .collect(),
    };
    if words.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{frequency_table, word_count};
    use proptest::prelude::*;

    const SAMPLE: &str = "this is a test and this is fun";

    fn words(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.raw).collect()
    }

    fn filler(n: usize) -> String {
        (0..n).map(|i| format!("w{}", i % 37)).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn insertion_count() {
        let (out, report) = attack(SAMPLE, &AttackSpec::new(0.25, 0.0, 0.0, 7), None).unwrap();
        assert_eq!(word_count(&out), 10);
        assert_eq!(report.inserted, 2);
        assert_eq!((report.wc_before, report.wc_after), (8, 10));
    }

    #[test]
    fn first_benchmark_row_arithmetic() {
        let text = filler(421);
        let (out, report) = attack(&text, &AttackSpec::new(0.26, 0.25, 0.0, 1), None).unwrap();
        assert_eq!((report.inserted, report.deleted), (109, 105));
        assert_eq!(report.wc_after, 425);
        assert_eq!(word_count(&out), 425);
    }

    #[test]
    fn null_attack_is_identity() {
        let text = "Some, text -- with\npunctuation!";
        let (out, report) = attack(text, &AttackSpec::null().with_seed(99), Some("with")).unwrap();
        assert_eq!(words(&out), words(text));
        assert_eq!(
            (report.inserted, report.deleted, report.transpositions, report.neighborhood_hits),
            (0, 0, 0, 0)
        );
        assert_eq!(report.wc_before, report.wc_after);
        assert_eq!(report.rng, RNG_ALGORITHM);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            AttackSpec::new(-0.1, 0.0, 0.0, 0),
            AttackSpec::new(0.0, 1.5, 0.0, 0),
            AttackSpec::new(f64::NAN, 0.0, 0.0, 0),
            AttackSpec::new(0.0, 0.0, f64::INFINITY, 0),
        ] {
            assert!(matches!(attack(SAMPLE, &spec, None), Err(Error::InvalidAttackSpec(_))));
        }
        assert!(matches!(attack("-- !!", &AttackSpec::null(), None), Err(Error::EmptyText)));
    }

    #[test]
    fn delete_everything() {
        let (out, report) = attack(SAMPLE, &AttackSpec::new(0.0, 1.0, 0.0, 3), Some("is")).unwrap();
        assert_eq!(word_count(&out), 0);
        assert_eq!(report.wc_after, 0);
        assert!(report.neighborhood_hits >= 2);
    }

    #[test]
    fn custom_lexicon_is_used() {
        let spec = AttackSpec {
            lexicon: Some(vec!["zebra".into()]),
            ..AttackSpec::new(0.5, 0.0, 0.0, 11)
        };
        let (out, _) = attack(SAMPLE, &spec, None).unwrap();
        assert_eq!(frequency_table(&out).get("zebra"), 4);

        let empty = AttackSpec {
            lexicon: Some(vec!["--".into()]),
            ..AttackSpec::new(0.5, 0.0, 0.0, 11)
        };
        assert!(matches!(attack(SAMPLE, &empty, None), Err(Error::EmptyLexicon)));
    }

    #[test]
    fn hits_are_counted_only_when_instrumented() {
        let spec = AttackSpec::new(0.5, 0.5, 0.5, 5);
        let (_, plain) = attack(SAMPLE, &spec, None).unwrap();
        assert_eq!(plain.neighborhood_hits, 0);
        let (_, hit) = attack(SAMPLE, &spec, Some("is")).unwrap();
        assert!(hit.neighborhood_hits > 0);
    }

    #[test]
    fn suite_examples() {
        assert!(attack_suite(SAMPLE, &[]).is_empty());
        let text = filler(200);
        let spec = AttackSpec::new(0.1, 0.1, 0.1, 42);
        let same = attack_suite(&text, &[spec.clone(), spec.clone()]);
        assert_eq!(same[0].as_ref().unwrap().0, same[1].as_ref().unwrap().0);
        let diff = attack_suite(&text, &[spec.clone().with_seed(1), spec.with_seed(2)]);
        assert_ne!(diff[0].as_ref().unwrap().0, diff[1].as_ref().unwrap().0);
    }

    #[test]
    fn suite_collects_errors_without_stopping() {
        let out = attack_suite(SAMPLE, &[AttackSpec::new(0.0, 2.0, 0.0, 0), AttackSpec::null()]);
        assert!(out[0].is_err());
        assert!(out[1].is_ok());
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["the", "and", "of", "Cat,", "in", "--", "garden", "walked", "a"]), 1..60)
            .prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn word_count_law(
            text in text_strategy(),
            ins in 0.0f64..1.5, del in 0.0f64..1.0, reo in 0.0f64..1.0, seed in any::<u64>(),
        ) {
            let n = word_count(&text);
            prop_assume!(n > 0);
            let spec = AttackSpec::new(ins, del, reo, seed);
            let (out, report) = attack(&text, &spec, Some("and")).unwrap();
            let expected = n + (ins * n as f64).round() as usize - (del * n as f64).round() as usize;
            prop_assert_eq!(report.wc_after, expected);
            prop_assert_eq!(word_count(&out), expected);
            prop_assert_eq!(report.wc_after, report.wc_before + report.inserted - report.deleted);
            let (again, _) = attack(&text, &spec, Some("and")).unwrap();
            prop_assert_eq!(out, again);
        }

        #[test]
        fn reordering_preserves_multiset(text in text_strategy(), reo in 0.0f64..1.0, seed in any::<u64>()) {
            prop_assume!(word_count(&text) > 0);
            let (out, report) = attack(&text, &AttackSpec::new(0.0, 0.0, reo, seed), None).unwrap();
            prop_assert_eq!(frequency_table(&out), frequency_table(&text));
            prop_assert_eq!(report.wc_after, report.wc_before);
        }
    }
}
