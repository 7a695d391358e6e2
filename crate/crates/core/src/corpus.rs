//! Deterministic synthetic English for experiments.
//!
//! The generator strings together simple clauses (determiner, adjective,
//! noun, prepositional phrase, verb, coordination) from a fixed vocabulary.
//! Function words such as "and", "of" and "in" come out at frequencies close
//! to ordinary prose, so the usual keyword choices always have many
//! occurrences. Output for a given `(words, seed)` never changes.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference attack volumes: sample label, original word count, insertion
/// and deletion ratios, and the reported word count after the attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkRow {
    pub label: &'static str,
    pub words: usize,
    pub insert_ratio: f64,
    pub delete_ratio: f64,
    pub attacked_words: usize,
}

pub const BENCHMARK_ROWS: [BenchmarkRow; 10] = [
    row("SST2", 421, 0.26, 0.25, 425),
    row("SST4", 179, 0.44, 0.54, 161),
    row("MST2", 559, 0.49, 0.25, 696),
    row("MST4", 2018, 0.14, 0.12, 2048),
    row("MST5", 469, 0.57, 0.53, 491),
    row("LST1", 7993, 0.09, 0.06, 8259),
    row("LST3", 1824, 0.26, 0.16, 2008),
    row("LST5", 16076, 0.09, 0.05, 16727),
    row("VLST3", 51800, 0.11, 0.07, 53603),
    row("VLST5", 67214, 0.07, 0.05, 68853),
];

const fn row(label: &'static str, words: usize, insert_ratio: f64, delete_ratio: f64, attacked_words: usize) -> BenchmarkRow {
    BenchmarkRow {
        label,
        words,
        insert_ratio,
        delete_ratio,
        attacked_words,
    }
}

/// Keywords used throughout the evaluation.
pub const EVAL_KEYWORDS: [&str; 3] = ["and", "of", "in"];

const DETERMINERS: &[&str] = &["the", "the", "the", "a", "a", "this", "that", "every", "some", "their", "its", "our"];

const ADJECTIVES: &[&str] = &[
    "old", "new", "small", "large", "quiet", "bright", "early", "late", "public", "private", "foreign", "local", "strong",
    "weak", "modern", "ancient", "careful", "sudden", "narrow", "wide", "green", "dark", "final", "central", "common",
    "rural", "urban", "formal", "simple", "complex", "famous", "official", "economic", "political",
];

const NOUNS: &[&str] = &[
    "house", "river", "market", "city", "garden", "letter", "bank", "company", "report", "government", "minister",
    "village", "harbour", "road", "price", "share", "council", "family", "child", "teacher", "doctor", "ship", "train",
    "winter", "summer", "morning", "evening", "office", "station", "church", "school", "field", "forest", "mountain",
    "window", "door", "table", "book", "story", "question", "answer", "plan", "agreement", "industry", "oil", "grain",
    "export", "profit", "quarter", "year", "week", "day", "court", "law", "policy", "director", "island", "valley",
    "bridge", "castle", "king", "queen", "soldier", "merchant", "farmer", "painter", "song", "light", "voice",
];

const VERBS: &[&str] = &[
    "saw", "found", "built", "sold", "bought", "left", "opened", "closed", "carried", "described", "reported", "raised",
    "lowered", "announced", "followed", "crossed", "visited", "watched", "praised", "rejected", "signed", "reached",
    "held", "kept", "moved", "painted", "wrote", "read", "heard", "remembered", "expected", "increased", "reduced",
];

const INTRANSITIVE: &[&str] = &["waited", "rose", "fell", "smiled", "arrived", "slept", "spoke", "returned", "remained", "changed"];

const ADVERBS: &[&str] = &["slowly", "quickly", "again", "there", "today", "yesterday", "often", "suddenly", "quietly", "sharply"];

// (word, weight); "of" and "in" dominate as in ordinary prose.
const NOUN_PREPOSITIONS: &[(&str, u32)] = &[
    ("of", 10),
    ("in", 7),
    ("on", 2),
    ("with", 2),
    ("for", 2),
    ("from", 2),
    ("by", 1),
    ("at", 2),
    ("near", 1),
    ("under", 1),
];

// Adverbial phrases after the verb lean locative.
const CLAUSE_PREPOSITIONS: &[(&str, u32)] = &[("in", 6), ("at", 2), ("on", 2), ("near", 1), ("from", 1), ("with", 1)];

const CONJUNCTIONS: &[(&str, u32)] = &[("and", 8), ("but", 2), ("while", 1), ("because", 1)];

struct Generator {
    rng: ChaCha8Rng,
    out: Vec<String>,
}

impl Generator {
    fn pick(&mut self, list: &[&'static str]) -> &'static str {
        list.choose(&mut self.rng).expect("non-empty vocabulary")
    }

    fn pick_weighted(&mut self, list: &[(&'static str, u32)]) -> &'static str {
        list.choose_weighted(&mut self.rng, |(_, w)| *w).expect("non-empty weighted list").0
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn push(&mut self, w: &str) {
        self.out.push(w.to_owned());
    }

    fn noun_phrase(&mut self, depth: u32) {
        let det = self.pick(DETERMINERS);
        self.push(det);
        if self.chance(0.45) {
            let adj = self.pick(ADJECTIVES);
            self.push(adj);
        }
        let noun = self.pick(NOUNS);
        self.push(noun);
        if depth < 2 && self.chance(0.18) {
            self.push("and");
            let noun = self.pick(NOUNS);
            self.push(noun);
        }
        if depth < 2 && self.chance(0.45) {
            let prep = self.pick_weighted(NOUN_PREPOSITIONS);
            self.push(prep);
            self.noun_phrase(depth + 1);
        }
    }

    fn clause(&mut self) {
        self.noun_phrase(0);
        if self.chance(0.25) {
            let verb = self.pick(INTRANSITIVE);
            self.push(verb);
        } else {
            let verb = self.pick(VERBS);
            self.push(verb);
            self.noun_phrase(1);
        }
        if self.chance(0.4) {
            let prep = self.pick_weighted(CLAUSE_PREPOSITIONS);
            self.push(prep);
            self.noun_phrase(1);
        }
        if self.chance(0.2) {
            let adv = self.pick(ADVERBS);
            self.push(adv);
        }
    }

    fn sentence(&mut self) {
        let start = self.out.len();
        self.clause();
        while self.chance(0.35) {
            let last = self.out.len() - 1;
            self.out[last].push(',');
            let conj = self.pick_weighted(CONJUNCTIONS);
            self.push(conj);
            self.clause();
        }
        capitalize(&mut self.out[start]);
        let last = self.out.len() - 1;
        self.out[last].push('.');
    }
}

fn capitalize(word: &mut String) {
    if let Some(first) = word.chars().next() {
        let upper: String = first.to_uppercase().collect();
        word.replace_range(..first.len_utf8(), &upper);
    }
}

/// Generates exactly `words` words of prose, wrapped into paragraphs.
pub fn synthesize(words: usize, seed: u64) -> String {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: Vec::with_capacity(words + 64),
    };
    let mut sentence_ends = Vec::new();
    while g.out.len() < words {
        g.sentence();
        sentence_ends.push(g.out.len());
    }
    g.out.truncate(words);
    if let Some(last) = g.out.last_mut() {
        let trimmed = last.trim_end_matches([',', '.']).len();
        last.truncate(trimmed);
        last.push('.');
    }

    let mut text = String::with_capacity(words * 7);
    let mut ends = sentence_ends.into_iter().peekable();
    let mut sentences_in_paragraph = 0;
    for (i, w) in g.out.iter().enumerate() {
        if i > 0 {
            text.push(' ');
        }
        text.push_str(w);
        if ends.peek() == Some(&(i + 1)) {
            ends.next();
            sentences_in_paragraph += 1;
            if sentences_in_paragraph == 6 && i + 1 < g.out.len() {
                text.push('\n');
                sentences_in_paragraph = 0;
            }
        }
    }
    text.push('\n');
    text
}

/// Sample id for benchmark row `i` (0-based): `s01` .. `s10`.
pub fn sample_id(i: usize) -> String {
    format!("s{:02}", i + 1)
}

/// The ten benchmark-sized samples as `(sample_id, label, text)`.
pub fn benchmark_samples(seed: u64) -> Vec<(String, &'static str, String)> {
    BENCHMARK_ROWS
        .iter()
        .enumerate()
        .map(|(i, row)| (sample_id(i), row.label, synthesize(row.words, seed.wrapping_add(i as u64))))
        .collect()
}
