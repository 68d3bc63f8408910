//! Metrics, report rows, and report serialization.
//!
//! Precision counts only structured, non-abstained responses; recall
//! divides by everything, abstentions and unstructured replies included.
//! Reports are written as line-delimited per-sample rows plus a summary
//! document whose aggregates are recomputable from the rows; a CSV export
//! mirrors the headline table columns.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{AlignmentScore, Verdict, VerdictLabel};
use crate::llm::YesNo;
use crate::perturb::{ItemKind, Label};

/// Bucketed outcome tallies for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Reasoning accounting.
    pub fr: usize,
    pub ur: usize,
    pub abstained: usize,
    pub unstructured: usize,
    /// Answer accounting over structured responses.
    pub correct: usize,
    pub incorrect: usize,
    /// Discriminative responses with no parseable YES/NO.
    pub unparseable: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facet {
    Answer,
    Reasoning,
}

/// Precision/recall/F1 with a degenerate-denominator flag. A zero
/// denominator pins the statistic to 0 and sets the flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flagged: bool,
}

/// The paper's two-equation scheme: P over structured non-abstained items,
/// R over all items, F1 harmonic.
pub fn precision_recall_f1(c: &Counts, facet: Facet) -> PrfScores {
    let (good, bad) = match facet {
        Facet::Answer => (c.correct, c.incorrect),
        Facet::Reasoning => (c.fr, c.ur),
    };
    let mut flagged = false;
    let p_den = good + bad;
    let precision = if p_den == 0 {
        flagged = true;
        0.0
    } else {
        good as f64 / p_den as f64
    };
    let r_den = good + bad + c.abstained + c.unstructured;
    let recall = if r_den == 0 {
        flagged = true;
        0.0
    } else {
        good as f64 / r_den as f64
    };
    let f1 = if precision + recall == 0.0 {
        flagged = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    PrfScores {
        precision,
        recall,
        f1,
        flagged,
    }
}

/// One generative-evaluation row: a single sample of a single question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRow {
    pub question_id: String,
    pub sample_index: usize,
    /// "structured", "unstructured", "abstained", or "errored".
    pub response_class: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<Verdict>,
    pub answer_correct: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alignment: Option<AlignmentScore>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Per-error-kind breakdown among unfaithful structured responses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorKinds {
    pub factual_error: usize,
    pub coherence_error: usize,
    pub answer_error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSummary {
    pub mode: String,
    pub model: String,
    pub sigma: f64,
    pub top_k: usize,
    pub samples: usize,
    pub seed: u64,
    /// Self-consistency folds each question's samples with any-success p
    /// aggregation before counting.
    pub self_consistency: bool,
    pub questions: usize,
    pub errored_questions: usize,
    pub counts: Counts,
    pub answer: PrfScores,
    pub reasoning: PrfScores,
    /// `answer.f1 - reasoning.f1`.
    pub gap: f64,
    /// Mean normalized edit distance over questions with an alignment.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_normalized_edit: Option<f64>,
    pub error_kinds: ErrorKinds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub rows: Vec<GenRow>,
    pub summary: GenSummary,
}

const CLASS_RANK: [&str; 4] = ["structured", "unstructured", "abstained", "errored"];

fn class_rank(class: &str) -> usize {
    CLASS_RANK.iter().position(|c| *c == class).unwrap_or(3)
}

/// Fold one question's samples into a single row: best response class,
/// any-correct answer, faithful if any sample was faithful, best alignment
/// by match rate.
pub fn aggregate_self_consistency(rows: &[GenRow]) -> Option<GenRow> {
    if rows.is_empty() {
        return None;
    }
    let best_class = rows
        .iter()
        .map(|r| r.response_class.as_str())
        .min_by_key(|c| class_rank(c))
        .expect("non-empty");
    let answer_correct = rows.iter().any(|r| r.answer_correct);
    let faithful = rows
        .iter()
        .find(|r| matches!(&r.verdict, Some(v) if v.label == VerdictLabel::Faithful));
    let verdict = match faithful {
        Some(row) => row.verdict.clone(),
        None => rows.iter().find_map(|r| r.verdict.clone()),
    };
    let alignment = rows
        .iter()
        .filter_map(|r| r.alignment.clone())
        .max_by(|a, b| a.match_rate.total_cmp(&b.match_rate));
    Some(GenRow {
        question_id: rows[0].question_id.clone(),
        sample_index: 0,
        response_class: best_class.to_string(),
        verdict,
        answer_correct,
        alignment,
        error: None,
    })
}

/// Group per-sample rows by question (preserving first-seen order) and
/// aggregate each group.
pub fn aggregate_rows(rows: &[GenRow]) -> Vec<GenRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: std::collections::HashMap<&str, Vec<GenRow>> = Default::default();
    for row in rows {
        if !groups.contains_key(row.question_id.as_str()) {
            order.push(&row.question_id);
        }
        groups
            .entry(row.question_id.as_str())
            .or_default()
            .push(row.clone());
    }
    order
        .iter()
        .filter_map(|id| aggregate_self_consistency(&groups[id]))
        .collect()
}

/// Recompute every aggregate of a generative summary from its rows. The
/// identity of this recomputation with the stored summary is checked at
/// write time.
pub fn recompute_gen_aggregates(rows: &[GenRow], base: &GenSummary) -> GenSummary {
    let per_question = aggregate_rows(rows);
    let mut counts = Counts::default();
    let mut error_kinds = ErrorKinds::default();
    let mut errored = 0usize;
    let mut edits: Vec<f64> = Vec::new();
    for row in &per_question {
        match row.response_class.as_str() {
            "abstained" => counts.abstained += 1,
            "errored" => errored += 1,
            "unstructured" => counts.unstructured += 1,
            "structured" => {
                if row.answer_correct {
                    counts.correct += 1;
                } else {
                    counts.incorrect += 1;
                }
                match row.verdict.as_ref().map(|v| v.label) {
                    Some(VerdictLabel::Faithful) => counts.fr += 1,
                    Some(VerdictLabel::FactualError) => {
                        counts.ur += 1;
                        error_kinds.factual_error += 1;
                    }
                    Some(VerdictLabel::CoherenceError) => {
                        counts.ur += 1;
                        error_kinds.coherence_error += 1;
                    }
                    Some(VerdictLabel::AnswerError) => {
                        counts.ur += 1;
                        error_kinds.answer_error += 1;
                    }
                    None => counts.ur += 1,
                }
            }
            _ => errored += 1,
        }
        if let Some(a) = &row.alignment {
            edits.push(a.normalized_edit);
        }
    }
    let answer = precision_recall_f1(&counts, Facet::Answer);
    let reasoning = precision_recall_f1(&counts, Facet::Reasoning);
    let gap = answer.f1 - reasoning.f1;
    GenSummary {
        questions: per_question.len(),
        errored_questions: errored,
        counts,
        gap,
        answer,
        reasoning,
        mean_normalized_edit: if edits.is_empty() {
            None
        } else {
            Some(edits.iter().sum::<f64>() / edits.len() as f64)
        },
        error_kinds,
        ..base.clone()
    }
}

/// One discriminative-evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscRow {
    pub question_id: String,
    pub kind: ItemKind,
    pub label: Label,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted: Option<YesNo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub correct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindAccuracy {
    pub kind: ItemKind,
    pub total: usize,
    pub parseable: usize,
    pub correct: usize,
    /// Correct over parseable; 0 and flagged when nothing parsed.
    pub accuracy: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscSummary {
    pub mode: String,
    pub model: String,
    pub items: usize,
    pub errored_items: usize,
    pub unparseable: usize,
    pub overall_accuracy: f64,
    pub overall_flagged: bool,
    pub per_kind: Vec<KindAccuracy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscReport {
    pub rows: Vec<DiscRow>,
    pub summary: DiscSummary,
}

const KIND_ORDER: [ItemKind; 4] = [
    ItemKind::Valid,
    ItemKind::FactualError,
    ItemKind::Incoherent,
    ItemKind::Misguided,
];

/// Recompute discriminative aggregates from rows. Unparseable responses
/// stay out of accuracy and are tallied separately.
pub fn recompute_disc_aggregates(rows: &[DiscRow], base: &DiscSummary) -> DiscSummary {
    let mut per_kind = Vec::new();
    for kind in KIND_ORDER {
        let of_kind: Vec<&DiscRow> = rows.iter().filter(|r| r.kind == kind).collect();
        let parseable = of_kind.iter().filter(|r| r.predicted.is_some()).count();
        let correct = of_kind.iter().filter(|r| r.correct == Some(true)).count();
        per_kind.push(KindAccuracy {
            kind,
            total: of_kind.len(),
            parseable,
            correct,
            accuracy: if parseable == 0 {
                0.0
            } else {
                correct as f64 / parseable as f64
            },
            flagged: parseable == 0,
        });
    }
    let errored = rows.iter().filter(|r| r.error.is_some()).count();
    let parseable = rows.iter().filter(|r| r.predicted.is_some()).count();
    let unparseable = rows.len() - parseable - errored;
    let correct = rows.iter().filter(|r| r.correct == Some(true)).count();
    DiscSummary {
        items: rows.len(),
        errored_items: errored,
        unparseable,
        overall_accuracy: if parseable == 0 {
            0.0
        } else {
            correct as f64 / parseable as f64
        },
        overall_flagged: parseable == 0,
        per_kind,
        ..base.clone()
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.push(b'\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let data = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(rows)
}

/// Write rows.jsonl, summary.json, and summary.csv into `dir`, verifying
/// first that the summary matches a recomputation from the rows.
pub fn write_gen_report(dir: &Path, report: &GenReport) -> Result<()> {
    let recomputed = recompute_gen_aggregates(&report.rows, &report.summary);
    if recomputed != report.summary {
        return Err(Error::RunFailed(
            "report aggregates do not match their rows".into(),
        ));
    }
    fs::create_dir_all(dir)?;
    write_rows(&dir.join("rows.jsonl"), &report.rows)?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_vec_pretty(&report.summary)?,
    )?;
    let mut csv = Vec::new();
    writeln!(
        csv,
        "model,mode,answer_f1,reasoning_f1,gap,edit_dist,precision_answer,recall_answer,precision_reasoning,recall_reasoning"
    )?;
    writeln!(
        csv,
        "{},{},{:.4},{:.4},{:.4},{},{:.4},{:.4},{:.4},{:.4}",
        report.summary.model,
        report.summary.mode,
        report.summary.answer.f1,
        report.summary.reasoning.f1,
        report.summary.gap,
        report
            .summary
            .mean_normalized_edit
            .map(|e| format!("{e:.2}"))
            .unwrap_or_else(|| "n/a".into()),
        report.summary.answer.precision,
        report.summary.answer.recall,
        report.summary.reasoning.precision,
        report.summary.reasoning.recall,
    )?;
    fs::write(dir.join("summary.csv"), csv)?;
    Ok(())
}

pub fn read_gen_report(dir: &Path) -> Result<GenReport> {
    let rows: Vec<GenRow> = read_rows(&dir.join("rows.jsonl"))?;
    let summary: GenSummary =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    Ok(GenReport { rows, summary })
}

pub fn write_disc_report(dir: &Path, report: &DiscReport) -> Result<()> {
    let recomputed = recompute_disc_aggregates(&report.rows, &report.summary);
    if recomputed != report.summary {
        return Err(Error::RunFailed(
            "report aggregates do not match their rows".into(),
        ));
    }
    fs::create_dir_all(dir)?;
    write_rows(&dir.join("rows.jsonl"), &report.rows)?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_vec_pretty(&report.summary)?,
    )?;
    let mut csv = Vec::new();
    writeln!(csv, "model,mode,kind,total,parseable,correct,accuracy")?;
    writeln!(
        csv,
        "{},{},overall,{},{},,{:.4}",
        report.summary.model,
        report.summary.mode,
        report.summary.items,
        report.summary.items - report.summary.unparseable - report.summary.errored_items,
        report.summary.overall_accuracy,
    )?;
    for k in &report.summary.per_kind {
        writeln!(
            csv,
            "{},{},{:?},{},{},{},{:.4}",
            report.summary.model,
            report.summary.mode,
            k.kind,
            k.total,
            k.parseable,
            k.correct,
            k.accuracy,
        )?;
    }
    fs::write(dir.join("summary.csv"), csv)?;
    Ok(())
}

pub fn read_disc_report(dir: &Path) -> Result<DiscReport> {
    let rows: Vec<DiscRow> = read_rows(&dir.join("rows.jsonl"))?;
    let summary: DiscSummary =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    Ok(DiscReport { rows, summary })
}
