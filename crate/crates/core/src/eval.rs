//! Word-level scoring of generated bulletin text against reference text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bulletin::{segment_forecast, Attribute, SegmentError};
use crate::area::AreaRegistry;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no scores to aggregate")]
    EmptyEvaluation,
    #[error("generated and expected fragments do not line up: {} orphan key(s), first {}", .orphans.len(), .orphans.first().map(|k| k.to_string()).unwrap_or_default())]
    AlignmentError { orphans: Vec<EvalKey> },
    #[error(transparent)]
    Segment(#[from] SegmentError),
}

/// Lowercased whitespace tokens with punctuation trimmed from both ends.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordScore {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl WordScore {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

impl std::ops::Add for WordScore {
    type Output = WordScore;

    fn add(self, o: WordScore) -> WordScore {
        WordScore {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for WordScore {
    fn sum<I: Iterator<Item = WordScore>>(iter: I) -> WordScore {
        iter.fold(WordScore::default(), |a, b| a + b)
    }
}

/// Multiset overlap between the generated and expected token bags.
pub fn word_score_tokens<S: AsRef<str>>(generated: &[S], expected: &[S]) -> WordScore {
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for w in expected {
        *counts.entry(w.as_ref()).or_default() += 1;
    }
    let mut tp = 0u64;
    for w in generated {
        if let Some(c) = counts.get_mut(w.as_ref()) {
            if *c > 0 {
                *c -= 1;
                tp += 1;
            }
        }
    }
    WordScore {
        tp,
        fp: generated.len() as u64 - tp,
        fn_: expected.len() as u64 - tp,
    }
}

pub fn word_score(generated: &str, expected: &str) -> WordScore {
    word_score_tokens(&tokenize(generated), &tokenize(expected))
}

/// Pooled counts over all scores.
pub fn micro_average(scores: &[WordScore]) -> Result<WordScore, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    Ok(scores.iter().copied().sum())
}

/// Identifies one attribute sentence of one area in one issue.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalKey {
    pub area: String,
    pub attribute: Attribute,
    pub issue_time: String,
}

impl std::fmt::Display for EvalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.issue_time, self.area, self.attribute)
    }
}

/// One JSON-lines record of expected or generated text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub key: EvalKey,
    pub text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub excluded: bool,
}

/// Attribute fragments of a full forecast, keyed for scoring. Fragments that
/// cover several areas are kept once per area with `excluded` set.
pub fn expected_records(
    forecast: &str,
    issue_time: &str,
    registry: &AreaRegistry,
) -> Result<Vec<EvalRecord>, EvalError> {
    let mut out = Vec::new();
    for f in segment_forecast(forecast, registry)? {
        let Some(attribute) = f.kind.attribute() else {
            continue;
        };
        for area in &f.areas {
            out.push(EvalRecord {
                key: EvalKey {
                    area: area.clone(),
                    attribute,
                    issue_time: issue_time.to_string(),
                },
                text: f.text.clone(),
                excluded: f.excluded,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub attribute: Attribute,
    pub system: String,
    pub counts: WordScore,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemAggregate {
    pub system: String,
    pub counts: WordScore,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean of the per-attribute F1 scores.
    pub average_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub systems: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub aggregate: Vec<SystemAggregate>,
    pub excluded_count: usize,
    pub scored_count: usize,
}

impl EvalReport {
    pub fn row(&self, attribute: Attribute, system: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.attribute == attribute && r.system == system)
    }

    pub fn aggregate_for(&self, system: &str) -> Option<&SystemAggregate> {
        self.aggregate.iter().find(|a| a.system == system)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned table: attribute x metric rows, one column per system and a
    /// difference column when exactly two systems are compared.
    pub fn render_table(&self) -> String {
        let diff = self.systems.len() == 2;
        let mut header = vec!["Attribute".to_string(), "Metric".to_string()];
        header.extend(self.systems.iter().cloned());
        if diff {
            header.push("Difference".into());
        }
        let pct = |v: f64| format!("{:.1}%", v * 100.0);
        let signed = |v: f64| format!("{:+.1}%", v * 100.0);
        let mut rows: Vec<Vec<String>> = Vec::new();
        for attribute in Attribute::ALL {
            let metrics: [(&str, fn(&ReportRow) -> f64); 3] = [
                ("Precision", |r| r.precision),
                ("Recall", |r| r.recall),
                ("F1", |r| r.f1),
            ];
            for (i, (name, get)) in metrics.iter().enumerate() {
                let values: Vec<f64> = self
                    .systems
                    .iter()
                    .map(|s| self.row(attribute, s).map(get).unwrap_or(0.0))
                    .collect();
                let mut row = vec![
                    if i == 0 { attribute.title().to_string() } else { String::new() },
                    name.to_string(),
                ];
                row.extend(values.iter().map(|&v| pct(v)));
                if diff {
                    row.push(signed(values[0] - values[1]));
                }
                rows.push(row);
            }
        }
        let avg: Vec<f64> = self
            .systems
            .iter()
            .map(|s| self.aggregate_for(s).map(|a| a.average_f1).unwrap_or(0.0))
            .collect();
        let mut row = vec!["Average F1".to_string(), String::new()];
        row.extend(avg.iter().map(|&v| pct(v)));
        if diff {
            row.push(signed(avg[0] - avg[1]));
        }
        rows.push(row);

        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().chain([&header]).map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let line = |r: &[String]| {
            r.iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c < 2 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", line(&header));
        let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        for r in &rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out.push('\n');
        for a in &self.aggregate {
            let _ = writeln!(
                out,
                "{}: micro-averaged P {} R {} F1 {} (tp {} fp {} fn {})",
                a.system,
                pct(a.precision),
                pct(a.recall),
                pct(a.f1),
                a.counts.tp,
                a.counts.fp,
                a.counts.fn_
            );
        }
        let _ = writeln!(
            out,
            "scored fragments: {}; excluded multi-area fragments: {}",
            self.scored_count, self.excluded_count
        );
        out
    }
}

/// Scores every system against the expected fragments. Excluded fragments
/// are skipped; every remaining key must be present in every system's
/// output and vice versa.
pub fn evaluate_systems(
    expected: &[EvalRecord],
    outputs: &[(String, Vec<EvalRecord>)],
) -> Result<EvalReport, EvalError> {
    let excluded_count = expected.iter().filter(|r| r.excluded).count();
    let scored: BTreeMap<&EvalKey, &str> = expected
        .iter()
        .filter(|r| !r.excluded)
        .map(|r| (&r.key, r.text.as_str()))
        .collect();
    if scored.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }

    let mut orphans = BTreeSet::new();
    let mut per_system = Vec::new();
    for (system, records) in outputs {
        let generated: BTreeMap<&EvalKey, &str> = records.iter().map(|r| (&r.key, r.text.as_str())).collect();
        orphans.extend(scored.keys().filter(|k| !generated.contains_key(*k)).map(|k| (*k).clone()));
        orphans.extend(generated.keys().filter(|k| !scored.contains_key(*k)).map(|k| (*k).clone()));
        per_system.push((system, generated));
    }
    if !orphans.is_empty() {
        return Err(EvalError::AlignmentError {
            orphans: orphans.into_iter().collect(),
        });
    }

    let mut rows = Vec::new();
    let mut aggregate = Vec::new();
    for (system, generated) in &per_system {
        let mut f1s = Vec::new();
        let mut all = Vec::new();
        for attribute in Attribute::ALL {
            let scores: Vec<WordScore> = scored
                .iter()
                .filter(|(k, _)| k.attribute == attribute)
                .map(|(k, exp)| word_score(generated[k], exp))
                .collect();
            let counts: WordScore = scores.iter().copied().sum();
            all.extend(scores);
            f1s.push(counts.f1());
            rows.push(ReportRow {
                attribute,
                system: system.to_string(),
                counts,
                precision: counts.precision(),
                recall: counts.recall(),
                f1: counts.f1(),
            });
        }
        let pooled = micro_average(&all)?;
        aggregate.push(SystemAggregate {
            system: system.to_string(),
            counts: pooled,
            precision: pooled.precision(),
            recall: pooled.recall(),
            f1: pooled.f1(),
            average_f1: f1s.iter().sum::<f64>() / f1s.len() as f64,
        });
    }

    Ok(EvalReport {
        systems: outputs.iter().map(|(s, _)| s.clone()).collect(),
        rows,
        aggregate,
        excluded_count,
        scored_count: scored.len(),
    })
}
