//! Judging grounded reasoning paths and scoring them against ground truth.
//!
//! A path fails in exactly one way, checked in strict order: a factual
//! error (some grounding scored below the threshold), a coherence error
//! (intact scores but a broken head/tail chain), or an answer error
//! (intact chain, wrong conclusion). Otherwise it is faithful.
//!
//! Fine-grained scoring aligns the grounded path against each ground-truth
//! path with Needleman-Wunsch (match +1, mismatch -1, gap -1) and reports
//! the best alignment. The edit distance is the number of alignment
//! columns that are not matches, normalized by the longer path length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_truth::{GroundTruthPath, QuestionRecord};
use crate::kg::{normalize, Triple};
use crate::retrieval::ReasoningPath;

/// Paper default for the factual threshold.
pub const DEFAULT_SIGMA: f64 = 0.7;

/// Evaluation knobs. Answer matching is bidirectional containment after
/// case-fold + trim.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub sigma: f64,
}

impl EvalConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::Config(format!(
                "sigma must be in (0, 1], got {sigma}"
            )));
        }
        Ok(EvalConfig { sigma })
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { sigma: DEFAULT_SIGMA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    Faithful,
    FactualError,
    CoherenceError,
    AnswerError,
}

impl std::fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictLabel::Faithful => "faithful",
            VerdictLabel::FactualError => "factual_error",
            VerdictLabel::CoherenceError => "coherence_error",
            VerdictLabel::AnswerError => "answer_error",
        };
        f.write_str(s)
    }
}

/// The judgement for one grounded path. `failing_step` is the zero-based
/// index of the first offending step, where one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub failing_step: Option<usize>,
    pub evidence: String,
}

/// Alignment quality between a grounded path and a ground-truth path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentScore {
    /// Non-match alignment columns (insertions + deletions + substitutions).
    pub edit_distance: usize,
    /// `100 * edit_distance / max(len_a, len_b)`; 0 for two empty paths.
    pub normalized_edit: f64,
    /// Matched triples over the longer path length; 1 for two empty paths.
    pub match_rate: f64,
}

impl AlignmentScore {
    fn from_edit(edit: usize, len_a: usize, len_b: usize) -> Self {
        let max_len = len_a.max(len_b);
        if max_len == 0 {
            return AlignmentScore {
                edit_distance: 0,
                normalized_edit: 0.0,
                match_rate: 1.0,
            };
        }
        let matches = max_len.saturating_sub(edit);
        AlignmentScore {
            edit_distance: edit,
            normalized_edit: 100.0 * edit as f64 / max_len as f64,
            match_rate: matches as f64 / max_len as f64,
        }
    }
}

/// Fuzzy answer check: true when some gold answer contains the prediction
/// or the prediction contains a gold answer, after case-fold + trim.
pub fn answer_match(predicted: &str, gold: &[String]) -> bool {
    let p = normalize(predicted);
    if p.is_empty() {
        return false;
    }
    gold.iter().any(|g| {
        let g = normalize(g);
        !g.is_empty() && (p.contains(&g) || g.contains(&p))
    })
}

/// Judge a grounded path. `final_answer` is the CoT's parsed conclusion
/// when one exists; without it the last grounded tail stands in.
pub fn evaluate_path(
    p: &ReasoningPath,
    final_answer: Option<&str>,
    q: &QuestionRecord,
    cfg: &EvalConfig,
) -> Result<Verdict> {
    if p.is_empty() {
        return Err(Error::EmptyPath);
    }
    let scores: Vec<f64> = p.groundings.iter().map(|g| g.final_score).collect();

    let factual = scores.iter().position(|&s| s < cfg.sigma);
    if let Some(i) = factual {
        return Ok(Verdict {
            label: VerdictLabel::FactualError,
            failing_step: Some(i),
            evidence: format!(
                "step {} grounded to {} with score {:.4} < sigma {:.4}",
                i + 1,
                p.groundings[i].triple,
                scores[i],
                cfg.sigma
            ),
        });
    }

    // Chain check over adjacent threshold-passing steps only.
    let order_break = (1..p.len()).find(|&i| {
        scores[i] >= cfg.sigma
            && scores[i - 1] >= cfg.sigma
            && p.groundings[i].triple.head.key() != p.groundings[i - 1].triple.tail.key()
    });
    if let Some(i) = order_break {
        return Ok(Verdict {
            label: VerdictLabel::CoherenceError,
            failing_step: Some(i),
            evidence: format!(
                "step {} head '{}' does not continue step {} tail '{}'",
                i + 1,
                p.groundings[i].triple.head,
                i,
                p.groundings[i - 1].triple.tail
            ),
        });
    }

    let last_tail = p.last_tail_label().unwrap_or_default().to_string();
    let predicted = final_answer.map(str::to_string).unwrap_or(last_tail);
    let gold = q.answer_labels();
    if !answer_match(&predicted, &gold) {
        return Ok(Verdict {
            label: VerdictLabel::AnswerError,
            failing_step: None,
            evidence: format!("predicted '{predicted}' not among gold answers {gold:?}"),
        });
    }

    Ok(Verdict {
        label: VerdictLabel::Faithful,
        failing_step: None,
        evidence: format!("path connects to gold answer '{predicted}'"),
    })
}

type Cell = (i64, u64); // (alignment score, non-match columns)

fn better(x: Cell, y: Cell) -> Cell {
    if x.0 > y.0 || (x.0 == y.0 && x.1 < y.1) {
        x
    } else {
        y
    }
}

/// Global alignment of two triple sequences with match +1, mismatch -1,
/// gap -1. Among maximal-score alignments the one with the fewest
/// non-match columns is reported, which reproduces unit-cost edit distance
/// at the path lengths this crate works with.
pub fn needleman_wunsch(a: &[Triple], b: &[Triple]) -> AlignmentScore {
    let (m, n) = (a.len(), b.len());
    let a_keys: Vec<_> = a.iter().map(Triple::key).collect();
    let b_keys: Vec<_> = b.iter().map(Triple::key).collect();
    let mut prev: Vec<Cell> = (0..=n).map(|j| (-(j as i64), j as u64)).collect();
    let mut curr: Vec<Cell> = vec![(0, 0); n + 1];
    for i in 1..=m {
        curr[0] = (-(i as i64), i as u64);
        for j in 1..=n {
            let diag = if a_keys[i - 1] == b_keys[j - 1] {
                (prev[j - 1].0 + 1, prev[j - 1].1)
            } else {
                (prev[j - 1].0 - 1, prev[j - 1].1 + 1)
            };
            let up = (prev[j].0 - 1, prev[j].1 + 1);
            let left = (curr[j - 1].0 - 1, curr[j - 1].1 + 1);
            curr[j] = better(better(diag, up), left);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    AlignmentScore::from_edit(prev[n].1 as usize, m, n)
}

/// Align against every ground-truth path and keep the best score: highest
/// match rate, then lowest edit distance, then ground-truth order.
pub fn fine_grained(p: &ReasoningPath, gts: &[GroundTruthPath]) -> Result<AlignmentScore> {
    if gts.is_empty() {
        return Err(Error::NoGroundTruth);
    }
    let mine = p.triples();
    let mut best: Option<AlignmentScore> = None;
    for gt in gts {
        let score = needleman_wunsch(&mine, &gt.steps);
        let replace = match &best {
            None => true,
            Some(b) => {
                score.match_rate > b.match_rate
                    || (score.match_rate == b.match_rate && score.edit_distance < b.edit_distance)
            }
        };
        if replace {
            best = Some(score);
        }
    }
    Ok(best.expect("gts is non-empty"))
}
