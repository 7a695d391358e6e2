//! Experiment harness: attack every sample under every keyword and report
//! keyword counts, tamper verdicts and WAR/WDR as CSV.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{attack_tokens, AttackSpec};
use crate::error::{Error, Result};
use crate::text::tokenize;
use crate::watermark::{generate_from_tokens, verify_tokens, CompareMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRef {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub samples: Vec<SampleRef>,
    pub keywords: Vec<String>,
    pub attacks: Vec<AttackSpec>,
    #[serde(default)]
    pub mode: CompareMode,
}

impl SuiteConfig {
    /// Reads a JSON config. Relative sample paths are resolved against the
    /// directory holding the config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: SuiteConfig = serde_json::from_str(&raw)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for sample in &mut config.samples {
            if sample.path.is_relative() {
                sample.path = base.join(&sample.path);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidConfig("no samples".into()));
        }
        if self.keywords.is_empty() {
            return Err(Error::InvalidConfig("no keywords".into()));
        }
        for spec in &self.attacks {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub wc_o: usize,
    pub wc_a: usize,
    pub tamper_detected: bool,
    pub war: f64,
    pub wdr: f64,
    pub neighborhood_hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub sample_id: String,
    pub keyword: String,
    pub insert_ratio: f64,
    pub delete_ratio: f64,
    pub reorder_ratio: f64,
    pub seed: u64,
    /// Error message when the trial could not be run.
    pub outcome: std::result::Result<TrialMetrics, String>,
}

impl TrialRow {
    fn new(sample_id: &str, keyword: &str, spec: &AttackSpec, outcome: std::result::Result<TrialMetrics, String>) -> Self {
        TrialRow {
            sample_id: sample_id.to_owned(),
            keyword: keyword.to_owned(),
            insert_ratio: spec.insert_ratio,
            delete_ratio: spec.delete_ratio,
            reorder_ratio: spec.reorder_ratio,
            seed: spec.seed,
            outcome,
        }
    }

    pub fn metrics(&self) -> Option<&TrialMetrics> {
        self.outcome.as_ref().ok()
    }
}

pub fn run_trial(sample_id: &str, text: &str, keyword: &str, spec: &AttackSpec, mode: CompareMode) -> Result<TrialRow> {
    let metrics = trial_metrics(&tokenize(text), keyword, spec, mode)?;
    Ok(TrialRow::new(sample_id, keyword, spec, Ok(metrics)))
}

fn trial_metrics(tokens: &[crate::text::Token], keyword: &str, spec: &AttackSpec, mode: CompareMode) -> Result<TrialMetrics> {
    let original = generate_from_tokens(tokens, keyword)?;
    let (attacked, report) = attack_tokens(tokens, spec, Some(keyword))?;
    let verdict = verify_tokens(&tokenize(&attacked), &original, mode)?;
    Ok(TrialMetrics {
        wc_o: verdict.kw_count_original,
        wc_a: verdict.kw_count_observed,
        tamper_detected: verdict.tampered,
        war: verdict.comparison.war,
        wdr: verdict.comparison.wdr,
        neighborhood_hits: report.neighborhood_hits,
    })
}

/// Runs every sample × keyword × attack cell. Row order is fixed by the
/// inputs (sample, then keyword, then attack), independent of scheduling.
pub fn run_suite(config: &SuiteConfig) -> Vec<TrialRow> {
    let texts: Vec<(String, std::result::Result<String, String>)> = config
        .samples
        .iter()
        .map(|s| {
            let text = fs::read_to_string(&s.path).map_err(|e| Error::io(&s.path, e).to_string());
            (s.id.clone(), text)
        })
        .collect();
    run_cells(&texts, &config.keywords, &config.attacks, config.mode)
}

/// [`run_suite`] over in-memory `(sample_id, text)` pairs.
pub fn run_suite_texts(samples: &[(String, String)], keywords: &[String], attacks: &[AttackSpec], mode: CompareMode) -> Vec<TrialRow> {
    let texts: Vec<_> = samples.iter().map(|(id, t)| (id.clone(), Ok(t.clone()))).collect();
    run_cells(&texts, keywords, attacks, mode)
}

fn run_cells(
    samples: &[(String, std::result::Result<String, String>)],
    keywords: &[String],
    attacks: &[AttackSpec],
    mode: CompareMode,
) -> Vec<TrialRow> {
    let tokenized: Vec<_> = samples
        .par_iter()
        .map(|(id, text)| (id.as_str(), text.as_ref().map(|t| tokenize(t))))
        .collect();
    let cells: Vec<(usize, &String, &AttackSpec)> = (0..tokenized.len())
        .flat_map(|s| keywords.iter().flat_map(move |k| attacks.iter().map(move |a| (s, k, a))))
        .collect();
    cells
        .into_par_iter()
        .map(|(s, keyword, spec)| {
            let (id, tokens) = &tokenized[s];
            let outcome = match tokens {
                Ok(tokens) => trial_metrics(tokens, keyword, spec, mode).map_err(|e| e.to_string()),
                Err(e) => Err((*e).clone()),
            };
            TrialRow::new(id, keyword, spec, outcome)
        })
        .collect()
}

pub const CSV_HEADER: [&str; 13] = [
    "sample_id",
    "keyword",
    "wc_o",
    "wc_a",
    "tamper_detected",
    "war",
    "wdr",
    "insert_ratio",
    "delete_ratio",
    "reorder_ratio",
    "seed",
    "neighborhood_hits",
    "error",
];

pub fn emit_csv(rows: &[TrialRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        let (metrics, error) = match &row.outcome {
            Ok(m) => (
                [
                    m.wc_o.to_string(),
                    m.wc_a.to_string(),
                    m.tamper_detected.to_string(),
                    m.war.to_string(),
                    m.wdr.to_string(),
                ],
                String::new(),
            ),
            Err(e) => (Default::default(), e.clone()),
        };
        let hits = row.metrics().map(|m| m.neighborhood_hits.to_string()).unwrap_or_default();
        w.write_record(
            [row.sample_id.clone(), row.keyword.clone()]
                .into_iter()
                .chain(metrics)
                .chain([
                    row.insert_ratio.to_string(),
                    row.delete_ratio.to_string(),
                    row.reorder_ratio.to_string(),
                    row.seed.to_string(),
                    hits,
                    error,
                ]),
        )?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is UTF-8"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WdrPoint {
    pub sample_id: String,
    pub seed: u64,
    pub wdr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WdrSeries {
    pub keyword: String,
    pub points: Vec<WdrPoint>,
}

/// One WDR series per keyword (first-seen order), points ordered by sample id.
pub fn chart_series(rows: &[TrialRow]) -> Vec<WdrSeries> {
    let mut series: Vec<WdrSeries> = Vec::new();
    for row in rows {
        let Some(m) = row.metrics() else { continue };
        let idx = match series.iter().position(|s| s.keyword == row.keyword) {
            Some(i) => i,
            None => {
                series.push(WdrSeries {
                    keyword: row.keyword.clone(),
                    points: Vec::new(),
                });
                series.len() - 1
            }
        };
        series[idx].points.push(WdrPoint {
            sample_id: row.sample_id.clone(),
            seed: row.seed,
            wdr: m.wdr,
        });
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    }
    series
}

pub fn chart_csv(rows: &[TrialRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["keyword", "sample_id", "seed", "wdr"])?;
    for s in chart_series(rows) {
        for p in &s.points {
            w.write_record([s.keyword.as_str(), &p.sample_id, &p.seed.to_string(), &p.wdr.to_string()])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is UTF-8"))
}
