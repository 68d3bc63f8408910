//! Grounding free-text reasoning steps to KG triples.
//!
//! Each step is embedded, the cosine top-k candidate triples are pulled
//! from the index, and every candidate is rescored by blending cosine
//! similarity with fuzzy-match ratios of the head and tail entity labels
//! against the step text:
//!
//! ```text
//! final = (cosine + head_match + tail_match) / 3
//! ```
//!
//! The candidate with the highest blended score wins; ties keep the
//! candidate with the higher cosine rank.

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingProvider;
use crate::error::{Error, Result};
use crate::index::{top_k, TripleIndex};
use crate::kg::{normalize, Triple};

/// Paper default for the number of retrieval candidates per step.
pub const DEFAULT_TOP_K: usize = 10;

/// A reasoning step grounded to its best triple, with the score parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepGrounding {
    pub step_text: String,
    pub triple: Triple,
    pub cosine_sim: f64,
    pub head_match: f64,
    pub tail_match: f64,
    pub final_score: f64,
}

/// The grounded form of a CoT: one grounding per step, in step order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningPath {
    pub groundings: Vec<StepGrounding>,
}

impl ReasoningPath {
    pub fn new(groundings: Vec<StepGrounding>) -> Self {
        ReasoningPath { groundings }
    }

    pub fn len(&self) -> usize {
        self.groundings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groundings.is_empty()
    }

    pub fn triples(&self) -> Vec<Triple> {
        self.groundings.iter().map(|g| g.triple.clone()).collect()
    }

    pub fn last_tail_label(&self) -> Option<&str> {
        self.groundings.last().map(|g| g.triple.tail.label.as_str())
    }
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Partial-ratio fuzzy match in `[0, 1]`: slide the shorter string across
/// the longer and keep the best window's Levenshtein similarity. Both
/// inputs are case-folded and trimmed first. An empty needle scores 1; an
/// empty haystack against a non-empty needle scores 0.
pub fn fuzzy_partial_ratio(needle: &str, haystack: &str) -> f64 {
    let needle = normalize(needle);
    let haystack = normalize(haystack);
    if needle.is_empty() {
        return 1.0;
    }
    if haystack.is_empty() {
        return 0.0;
    }
    let n: Vec<char> = needle.chars().collect();
    let h: Vec<char> = haystack.chars().collect();
    let (short, long) = if n.len() <= h.len() { (&n, &h) } else { (&h, &n) };
    let w = short.len();
    let mut best = 0.0f64;
    for window in long.windows(w) {
        let d = levenshtein(short, window);
        let sim = 1.0 - d as f64 / w as f64;
        if sim > best {
            best = sim;
        }
        if best == 1.0 {
            break;
        }
    }
    best
}

/// Blend the cosine similarity of a candidate triple with the fuzzy
/// presence of its head and tail labels in the step text.
pub fn score_triple(step: &str, t: &Triple, cosine_sim: f64) -> StepGrounding {
    let head_match = fuzzy_partial_ratio(&t.head.label, step);
    let tail_match = fuzzy_partial_ratio(&t.tail.label, step);
    StepGrounding {
        step_text: step.to_string(),
        triple: t.clone(),
        cosine_sim,
        head_match,
        tail_match,
        final_score: (cosine_sim + head_match + tail_match) / 3.0,
    }
}

/// Ground one step: embed it, fetch the cosine top-k candidates, rescore
/// each, and return the best. Ties stay with the higher-ranked candidate.
pub fn retrieve_triple(
    step: &str,
    index: &TripleIndex,
    provider: &dyn EmbeddingProvider,
    k: usize,
) -> Result<StepGrounding> {
    if index.is_empty() {
        return Err(Error::NoCandidate("retrieval index is empty".into()));
    }
    let query = provider.embed_one(step)?;
    let candidates = top_k(index, &query, k)?;
    let mut best: Option<StepGrounding> = None;
    for (t, sim) in &candidates {
        let scored = score_triple(step, t, *sim);
        match &best {
            Some(b) if scored.final_score <= b.final_score => {}
            _ => best = Some(scored),
        }
    }
    best.ok_or_else(|| Error::NoCandidate("no retrieval candidates".into()))
}

/// Ground every step of a CoT, preserving step order.
pub fn construct_path(
    steps: &[String],
    index: &TripleIndex,
    provider: &dyn EmbeddingProvider,
    k: usize,
) -> Result<ReasoningPath> {
    if steps.is_empty() {
        return Err(Error::EmptyPath);
    }
    let mut groundings = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let g = retrieve_triple(step, index, provider, k).map_err(|e| Error::Construction {
            step: i,
            msg: e.to_string(),
        })?;
        groundings.push(g);
    }
    Ok(ReasoningPath::new(groundings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::TrigramEmbedder;
    use crate::index::build_index;
    use crate::kg::{load_triples, verbalize, KnowledgeGraph};
    use std::io::Cursor;

    #[test]
    fn identical_strings_match_fully() {
        assert_eq!(fuzzy_partial_ratio("Greece", "Greece"), 1.0);
    }

    #[test]
    fn exact_substring_window_matches_fully() {
        assert_eq!(
            fuzzy_partial_ratio("Greece", "the primary language spoken in Greece is Greek"),
            1.0
        );
    }

    #[test]
    fn near_miss_window_scores_by_edit_distance() {
        // Best window is "jaxon bieber" (12 chars) at distance 2.
        let got = fuzzy_partial_ratio("Jaxon Beiber", "so jaxon bieber is the brother");
        assert!((got - (1.0 - 2.0 / 12.0)).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(fuzzy_partial_ratio("", "anything"), 1.0);
        assert_eq!(fuzzy_partial_ratio("needle", ""), 0.0);
        assert_eq!(fuzzy_partial_ratio("", ""), 1.0);
    }

    #[test]
    fn score_triple_blends_evenly() {
        let t = Triple::from_labels("Justin Bieber", "child_of", "Jeremy Bieber");
        // tau=0.8 with a synthetic step that contains the head exactly and
        // misses the tail entirely would vary; pin the arithmetic instead.
        let g = score_triple("Justin Bieber is the child of Jeremy Bieber", &t, 0.8);
        assert!((g.final_score - (0.8 + g.head_match + g.tail_match) / 3.0).abs() < 1e-12);
        assert_eq!(g.head_match, 1.0);
        assert_eq!(g.tail_match, 1.0);
        assert!((g.final_score - (0.8 + 2.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn score_triple_extremes() {
        let t = Triple::from_labels("A bc", "r", "D ef");
        let empty = score_triple("", &t, 0.0);
        assert_eq!(empty.final_score, 0.0);
        let full = score_triple("A bc r D ef.", &t, 1.0);
        assert_eq!(full.final_score, 1.0);
    }

    fn family_graph() -> KnowledgeGraph {
        load_triples(Cursor::new(
            "Justin Bieber\tchild_of\tJeremy Bieber\n\
             Jeremy Bieber\tfather_of\tJaxon Bieber\n\
             Rihanna\tpeople.person.nationality\tBarbados\n",
        ))
        .unwrap()
    }

    #[test]
    fn single_triple_index_is_a_forced_choice() {
        let g = load_triples(Cursor::new("a\tr\tb\n")).unwrap();
        let provider = TrigramEmbedder::new();
        let index = build_index(&g, &provider, 4).unwrap();
        let got = retrieve_triple("totally unrelated step text", &index, &provider, 10).unwrap();
        assert_eq!(got.triple, g.triples()[0]);
    }

    #[test]
    fn verbatim_step_grounds_with_perfect_score() {
        let g = family_graph();
        let provider = TrigramEmbedder::new();
        let index = build_index(&g, &provider, 4).unwrap();
        let step = verbalize(&g.triples()[0]);
        let got = retrieve_triple(&step, &index, &provider, 10).unwrap();
        assert_eq!(got.triple, g.triples()[0]);
        assert!((got.final_score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_step_cot_grounds_in_order() {
        let g = family_graph();
        let provider = TrigramEmbedder::new();
        let index = build_index(&g, &provider, 4).unwrap();
        let steps = vec![
            "Justin Bieber is the child of Jeremy Bieber.".to_string(),
            "Jeremy Bieber is the father of Jaxon Bieber.".to_string(),
        ];
        let path = construct_path(&steps, &index, &provider, 10).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path.groundings[0].triple.relation.name, "child_of");
        assert_eq!(path.groundings[1].triple.relation.name, "father_of");
    }

    #[test]
    fn duplicate_steps_ground_identically() {
        let g = family_graph();
        let provider = TrigramEmbedder::new();
        let index = build_index(&g, &provider, 4).unwrap();
        let step = "Rihanna's nationality is Barbados.".to_string();
        let path =
            construct_path(&[step.clone(), step], &index, &provider, 10).unwrap();
        assert_eq!(path.groundings[0], path.groundings[1]);
    }

    #[test]
    fn single_step_cot_yields_length_one_path() {
        let g = family_graph();
        let provider = TrigramEmbedder::new();
        let index = build_index(&g, &provider, 4).unwrap();
        let path = construct_path(
            &["Justin Bieber child_of Jeremy Bieber.".to_string()],
            &index,
            &provider,
            10,
        )
        .unwrap();
        assert_eq!(path.len(), 1);
    }

    #[test]
    fn empty_index_errors() {
        let provider = TrigramEmbedder::new();
        let index = build_index(&family_graph(), &provider, 4).unwrap();
        drop(index);
        let empty = build_index(&KnowledgeGraph::new(), &provider, 4).unwrap();
        assert!(retrieve_triple("step", &empty, &provider, 10).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ratio_stays_in_unit_interval(a in ".{0,24}", b in ".{0,24}") {
                let r = fuzzy_partial_ratio(&a, &b);
                prop_assert!((0.0..=1.0).contains(&r));
            }

            #[test]
            fn needle_inside_haystack_scores_one(
                pre in "[a-z ]{0,10}",
                needle in "[a-z]{1,8}",
                post in "[a-z ]{0,10}",
            ) {
                let haystack = format!("{pre}{needle}{post}");
                prop_assert_eq!(fuzzy_partial_ratio(&needle, &haystack), 1.0);
            }

            #[test]
            fn blended_score_is_exact(
                tau in -1.0f64..=1.0,
                step in "[a-z A-Z]{0,30}",
            ) {
                let t = Triple::from_labels("Helen Keller", "place_of_death", "Easton");
                let g = score_triple(&step, &t, tau);
                prop_assert!((3.0 * g.final_score - g.cosine_sim - g.head_match - g.tail_match).abs() < 1e-9);
                prop_assert!(g.final_score >= -1.0 / 3.0 - 1e-12 && g.final_score <= 1.0 + 1e-12);
            }
        }
    }
}
