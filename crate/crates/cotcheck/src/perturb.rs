//! Invalid-path generation for discriminative evaluation.
//!
//! Three perturbations of a valid ground-truth path: corrupt an entity so
//! the path carries a fact the KG does not support, shuffle the triples so
//! the chain breaks while every fact stays true, or swap in a valid path
//! that answers a different question. Every emitted item is machine-checked
//! against its kind invariant at generation time.
//!
//! Triple presence checks are direction-agnostic, matching the
//! bidirectional edge semantics used for path extraction.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_truth::{extract_paths, validate_path, GroundTruthPath, QuestionRecord, DEFAULT_MAX_HOPS};
use crate::kg::{KnowledgeGraph, Triple};

const MAX_RETRIES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    FactualError,
    Incoherent,
    Misguided,
}

/// A perturbed path with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbedPath {
    pub steps: Vec<Triple>,
    pub kind: PerturbKind,
    pub origin_question: String,
    pub seed: u64,
}

/// Item kind in a discriminative dataset: the unperturbed valid path or
/// one of the three perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Valid,
    FactualError,
    Incoherent,
    Misguided,
}

impl From<PerturbKind> for ItemKind {
    fn from(k: PerturbKind) -> Self {
        match k {
            PerturbKind::FactualError => ItemKind::FactualError,
            PerturbKind::Incoherent => ItemKind::Incoherent,
            PerturbKind::Misguided => ItemKind::Misguided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    YES,
    NO,
}

/// One labeled example for the discriminative probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscriminativeItem {
    pub question_id: String,
    pub question: String,
    pub answer: String,
    pub path: Vec<Triple>,
    pub label: Label,
    pub kind: ItemKind,
}

/// Per-question item counts; defaults to one of each.
#[derive(Debug, Clone, Copy)]
pub struct MixSpec {
    pub valid: usize,
    pub factual_error: usize,
    pub incoherent: usize,
    pub misguided: usize,
}

impl Default for MixSpec {
    fn default() -> Self {
        MixSpec {
            valid: 1,
            factual_error: 1,
            incoherent: 1,
            misguided: 1,
        }
    }
}

/// Presence under the bidirectional edge view.
pub fn in_graph_bidirectional(g: &KnowledgeGraph, t: &Triple) -> bool {
    g.contains(t) || g.contains(&t.reversed())
}

fn has_absent_triple(g: &KnowledgeGraph, steps: &[Triple]) -> bool {
    steps.iter().any(|t| !in_graph_bidirectional(g, t))
}

fn has_broken_junction(steps: &[Triple]) -> bool {
    (1..steps.len()).any(|i| steps[i].head.key() != steps[i - 1].tail.key())
}

/// Replace `positions` randomly chosen entity slots with random entities
/// until at least one resulting triple is absent from the KG. A slot is a
/// head or tail of one step; a junction entity is replaced only at the
/// chosen slot, so right-then-wrong and wrong-then-right patterns both
/// occur.
pub fn corrupt_entities(
    p: &GroundTruthPath,
    g: &KnowledgeGraph,
    seed: u64,
) -> Result<PerturbedPath> {
    corrupt_entities_n(p, g, seed, 1)
}

pub fn corrupt_entities_n(
    p: &GroundTruthPath,
    g: &KnowledgeGraph,
    seed: u64,
    positions: usize,
) -> Result<PerturbedPath> {
    if p.is_empty() {
        return Err(Error::Generation("cannot corrupt an empty path".into()));
    }
    if g.entity_count() < 2 {
        return Err(Error::Generation("KG has fewer than two entities".into()));
    }
    let positions = positions.max(1).min(2 * p.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let mut steps = p.steps.clone();
        let mut slots: Vec<usize> = (0..2 * p.len()).collect();
        slots.shuffle(&mut rng);
        for &slot in slots.iter().take(positions) {
            let (idx, is_tail) = (slot / 2, slot % 2 == 1);
            let original = if is_tail {
                steps[idx].tail.clone()
            } else {
                steps[idx].head.clone()
            };
            let exclude: HashSet<_> = [original].into_iter().collect();
            let replacement = g.sample_entity_with(&mut rng, &exclude)?;
            if is_tail {
                steps[idx].tail = replacement;
            } else {
                steps[idx].head = replacement;
            }
        }
        if has_absent_triple(g, &steps) {
            return Ok(PerturbedPath {
                steps,
                kind: PerturbKind::FactualError,
                origin_question: String::new(),
                seed,
            });
        }
    }
    Err(Error::Generation(format!(
        "no corruption produced a KG-absent triple after {MAX_RETRIES} attempts"
    )))
}

/// Permute the path's triples into a uniformly random non-identity order
/// whose chaining is broken at one junction or more.
pub fn shuffle_path(p: &GroundTruthPath, seed: u64) -> Result<PerturbedPath> {
    if p.len() < 2 {
        return Err(Error::NotShufflable);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.shuffle(&mut rng);
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        let steps: Vec<Triple> = order.iter().map(|&j| p.steps[j].clone()).collect();
        if has_broken_junction(&steps) {
            return Ok(PerturbedPath {
                steps,
                kind: PerturbKind::Incoherent,
                origin_question: String::new(),
                seed,
            });
        }
    }
    Err(Error::Generation(format!(
        "no permutation broke the chain after {MAX_RETRIES} attempts"
    )))
}

/// Ground-truth paths of one question, as sampled for misguided items.
#[derive(Debug, Clone)]
pub struct QuestionPaths {
    pub question_id: String,
    pub paths: Vec<GroundTruthPath>,
}

/// Uniformly sample a valid path belonging to a different question. Paths
/// equal to one of `own_paths` are excluded.
pub fn sample_misguided(
    q: &QuestionRecord,
    own_paths: &[GroundTruthPath],
    pool: &[QuestionPaths],
    seed: u64,
) -> Result<PerturbedPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<(&str, &GroundTruthPath)> = pool
        .iter()
        .filter(|entry| entry.question_id != q.id)
        .flat_map(|entry| {
            entry
                .paths
                .iter()
                .map(move |p| (entry.question_id.as_str(), p))
        })
        .filter(|(_, p)| !own_paths.iter().any(|own| own.same_as(p)))
        .collect();
    if eligible.is_empty() {
        return Err(Error::Generation(
            "no eligible path from another question".into(),
        ));
    }
    let (origin, path) = eligible[rng.random_range(0..eligible.len())];
    Ok(PerturbedPath {
        steps: path.steps.clone(),
        kind: PerturbKind::Misguided,
        origin_question: origin.to_string(),
        seed,
    })
}

/// A generated discriminative dataset plus one log line per skipped item.
#[derive(Debug, Default)]
pub struct DiscriminativeSet {
    pub items: Vec<DiscriminativeItem>,
    pub skipped: Vec<String>,
}

fn question_seed(seed: u64, question_id: &str) -> u64 {
    // FNV-1a over the id, folded with the run seed; stable across runs.
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x0000_0100_0000_01b3);
    for b in question_id.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Build the labeled YES/NO item pool for a dataset: per question, valid
/// paths straight from ground truth and perturbed paths per the mix.
/// Deterministic for a fixed `(dataset, g, seed)`; generator failures skip
/// the item with a logged reason.
pub fn build_discriminative_set(
    dataset: &[QuestionRecord],
    g: &KnowledgeGraph,
    seed: u64,
    mix: MixSpec,
) -> Result<DiscriminativeSet> {
    let mut out = DiscriminativeSet::default();
    let mut all_paths: Vec<QuestionPaths> = Vec::new();
    let mut paths_by_q: HashMap<String, Vec<GroundTruthPath>> = HashMap::new();
    let by_id: HashMap<&str, &QuestionRecord> =
        dataset.iter().map(|q| (q.id.as_str(), q)).collect();
    for q in dataset {
        let paths = extract_paths(q, DEFAULT_MAX_HOPS)?;
        all_paths.push(QuestionPaths {
            question_id: q.id.clone(),
            paths: paths.clone(),
        });
        paths_by_q.insert(q.id.clone(), paths);
    }

    for q in dataset {
        let paths = &paths_by_q[&q.id];
        if paths.is_empty() {
            out.skipped
                .push(format!("{}: no ground-truth path", q.id));
            continue;
        }
        let answer = q.answer_labels().join(", ");
        let qseed = question_seed(seed, &q.id);
        let item = |path: Vec<Triple>, label: Label, kind: ItemKind| DiscriminativeItem {
            question_id: q.id.clone(),
            question: q.question.clone(),
            answer: answer.clone(),
            path,
            label,
            kind,
        };

        for p in paths.iter().take(mix.valid) {
            out.items
                .push(item(p.steps.clone(), Label::YES, ItemKind::Valid));
        }

        for i in 0..mix.factual_error {
            match corrupt_entities(&paths[0], g, qseed.wrapping_add(i as u64)) {
                Ok(pp) => {
                    debug_assert!(has_absent_triple(g, &pp.steps));
                    out.items
                        .push(item(pp.steps, Label::NO, ItemKind::FactualError));
                }
                Err(e) => out.skipped.push(format!("{}: factual_error: {e}", q.id)),
            }
        }

        for i in 0..mix.incoherent {
            let source = paths.iter().find(|p| p.len() >= 2);
            match source {
                Some(p) => match shuffle_path(p, qseed.wrapping_add(1000 + i as u64)) {
                    Ok(pp) => {
                        debug_assert!(has_broken_junction(&pp.steps));
                        debug_assert!(!has_absent_triple(g, &pp.steps));
                        out.items
                            .push(item(pp.steps, Label::NO, ItemKind::Incoherent));
                    }
                    Err(e) => out.skipped.push(format!("{}: incoherent: {e}", q.id)),
                },
                None => out
                    .skipped
                    .push(format!("{}: incoherent: all paths are single-hop", q.id)),
            }
        }

        for i in 0..mix.misguided {
            match sample_misguided(q, paths, &all_paths, qseed.wrapping_add(2000 + i as u64)) {
                Ok(pp) => {
                    let as_gt = GroundTruthPath::new(pp.steps.clone());
                    let origin_ok = by_id
                        .get(pp.origin_question.as_str())
                        .map(|oq| validate_path(&as_gt, oq))
                        .unwrap_or(false);
                    debug_assert!(origin_ok && !validate_path(&as_gt, q));
                    out.items
                        .push(item(pp.steps, Label::NO, ItemKind::Misguided));
                }
                Err(e) => out.skipped.push(format!("{}: misguided: {e}", q.id)),
            }
        }
    }
    Ok(out)
}

/// Serialize items as line-delimited JSON.
pub fn save_items<W: std::io::Write>(items: &[DiscriminativeItem], sink: &mut W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut *sink, item)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_items<R: BufRead>(source: R) -> Result<Vec<DiscriminativeItem>> {
    let mut out = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}
