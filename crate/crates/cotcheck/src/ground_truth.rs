//! Ground-truth reasoning paths: simple paths from a topic entity to an
//! answer entity inside a question's subgraph.
//!
//! Traversal treats edges as bidirectional; walking an edge backwards emits
//! the triple with head and tail swapped and the relation name unchanged,
//! which matches how the datasets render reversed Freebase edges.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Cursor};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{Entity, KnowledgeGraph, Relation, Triple};

/// Default hop budget; the supported datasets top out at 4-hop questions.
pub const DEFAULT_MAX_HOPS: usize = 4;

/// One question with its topic entities, gold answers, and subgraph.
#[derive(Debug, Clone)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub topic_entities: Vec<Entity>,
    pub answer_entities: Vec<Entity>,
    pub subgraph: KnowledgeGraph,
}

impl QuestionRecord {
    /// Gold answer surface forms, used by answer matching.
    pub fn answer_labels(&self) -> Vec<String> {
        self.answer_entities.iter().map(|e| e.label.clone()).collect()
    }
}

/// An ordered chain of triples from a topic entity to an answer entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthPath {
    pub steps: Vec<Triple>,
}

impl GroundTruthPath {
    pub fn new(steps: Vec<Triple>) -> Self {
        GroundTruthPath { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The relation sequence, e.g. for plan hints.
    pub fn relations(&self) -> Vec<Relation> {
        self.steps.iter().map(|t| t.relation.clone()).collect()
    }

    fn key(&self) -> Vec<(String, String, String)> {
        self.steps.iter().map(Triple::key).collect()
    }

    /// Normalized equality against another path.
    pub fn same_as(&self, other: &GroundTruthPath) -> bool {
        self.key() == other.key()
    }
}

/// All simple paths of length 1..=`max_hops` from any topic entity to any
/// answer entity, over the bidirectional view of the subgraph. No path is
/// not an error: the result is simply empty.
pub fn extract_paths(q: &QuestionRecord, max_hops: usize) -> Result<Vec<GroundTruthPath>> {
    for e in q.topic_entities.iter().chain(q.answer_entities.iter()) {
        if !q.subgraph.contains_entity(e) {
            return Err(Error::MissingEntity(e.label.clone()));
        }
    }
    let answer_keys: HashSet<String> = q.answer_entities.iter().map(Entity::key).collect();

    let mut found = Vec::new();
    let mut seen = HashSet::new();
    // Topic entities are enumerated independently.
    for topic in &q.topic_entities {
        let mut visited: HashSet<String> = [topic.key()].into_iter().collect();
        let mut prefix: Vec<Triple> = Vec::new();
        dfs(
            &q.subgraph,
            topic,
            &answer_keys,
            max_hops,
            &mut visited,
            &mut prefix,
            &mut seen,
            &mut found,
        );
    }
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &KnowledgeGraph,
    at: &Entity,
    answers: &HashSet<String>,
    budget: usize,
    visited: &mut HashSet<String>,
    prefix: &mut Vec<Triple>,
    seen: &mut HashSet<Vec<(String, String, String)>>,
    found: &mut Vec<GroundTruthPath>,
) {
    if budget == 0 {
        return;
    }
    // Forward edges as-is, backward edges with endpoints swapped.
    let steps: Vec<Triple> = g
        .outgoing(at)
        .cloned()
        .chain(g.incoming(at).map(Triple::reversed))
        .collect();
    for step in steps {
        let next = step.tail.clone();
        if visited.contains(&next.key()) {
            continue;
        }
        prefix.push(step);
        visited.insert(next.key());
        if answers.contains(&next.key()) {
            let path = GroundTruthPath::new(prefix.clone());
            if seen.insert(path.key()) {
                found.push(path);
            }
        }
        dfs(g, &next, answers, budget - 1, visited, prefix, seen, found);
        visited.remove(&next.key());
        prefix.pop();
    }
}

/// Check the ground-truth path invariants against a question: non-empty,
/// chained head-to-tail, starts at a topic entity, ends at an answer
/// entity, and visits no entity twice.
pub fn validate_path(p: &GroundTruthPath, q: &QuestionRecord) -> bool {
    if p.steps.is_empty() {
        return false;
    }
    let topic_keys: HashSet<String> = q.topic_entities.iter().map(Entity::key).collect();
    let answer_keys: HashSet<String> = q.answer_entities.iter().map(Entity::key).collect();
    if !topic_keys.contains(&p.steps[0].head.key()) {
        return false;
    }
    if !answer_keys.contains(&p.steps[p.steps.len() - 1].tail.key()) {
        return false;
    }
    let mut chain = vec![p.steps[0].head.key()];
    for (i, step) in p.steps.iter().enumerate() {
        if i > 0 && step.head.key() != p.steps[i - 1].tail.key() {
            return false;
        }
        chain.push(step.tail.key());
    }
    let distinct: HashSet<&String> = chain.iter().collect();
    distinct.len() == chain.len()
}

#[derive(Debug, Deserialize)]
struct RawQuestion {
    id: String,
    question: String,
    topic_entities: Vec<String>,
    answer_entities: Vec<String>,
    #[serde(default)]
    triples: Option<Vec<(String, String, String)>>,
    #[serde(default)]
    subgraph_file: Option<String>,
}

/// Outcome of loading a question dataset: usable records plus one report
/// line per skipped record.
#[derive(Debug, Default)]
pub struct DatasetLoad {
    pub records: Vec<QuestionRecord>,
    pub skipped: Vec<String>,
}

/// Load a line-delimited question dataset. Each record carries either an
/// inline triple list or a `subgraph_file` path resolved relative to the
/// dataset file. Records whose topic or answer entities are missing from
/// their subgraph are reported and skipped.
pub fn load_dataset(path: &Path) -> Result<DatasetLoad> {
    let file = File::open(path)?;
    load_dataset_from(BufReader::new(file), path.parent())
}

pub fn load_dataset_from<R: BufRead>(source: R, base_dir: Option<&Path>) -> Result<DatasetLoad> {
    let mut out = DatasetLoad::default();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawQuestion = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let subgraph = match (&raw.triples, &raw.subgraph_file) {
            (Some(triples), _) => {
                let mut g = KnowledgeGraph::new();
                for (h, r, t) in triples {
                    g.insert(Triple::from_labels(h, r, t));
                }
                g
            }
            (None, Some(rel)) => {
                let resolved = match base_dir {
                    Some(dir) => dir.join(rel),
                    None => Path::new(rel).to_path_buf(),
                };
                crate::kg::load_triples(BufReader::new(File::open(&resolved)?))?
            }
            (None, None) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "record has neither `triples` nor `subgraph_file`".into(),
                })
            }
        };
        let record = QuestionRecord {
            id: raw.id,
            question: raw.question,
            topic_entities: raw.topic_entities.iter().map(Entity::from_label).collect(),
            answer_entities: raw.answer_entities.iter().map(Entity::from_label).collect(),
            subgraph,
        };
        let missing: Vec<&Entity> = record
            .topic_entities
            .iter()
            .chain(record.answer_entities.iter())
            .filter(|e| !record.subgraph.contains_entity(e))
            .collect();
        if missing.is_empty() {
            out.records.push(record);
        } else {
            out.skipped.push(format!(
                "record {}: entities missing from subgraph: {}",
                record.id,
                missing
                    .iter()
                    .map(|e| e.label.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
    }
    Ok(out)
}

/// Convenience for tests and fixtures: build a record from string parts.
pub fn question(
    id: &str,
    text: &str,
    topics: &[&str],
    answers: &[&str],
    subgraph: KnowledgeGraph,
) -> QuestionRecord {
    QuestionRecord {
        id: id.to_string(),
        question: text.to_string(),
        topic_entities: topics.iter().map(|s| Entity::from_label(*s)).collect(),
        answer_entities: answers.iter().map(|s| Entity::from_label(*s)).collect(),
        subgraph,
    }
}

/// Parse a dataset held in memory, for fixtures.
pub fn load_dataset_str(data: &str, base_dir: Option<&Path>) -> Result<DatasetLoad> {
    load_dataset_from(Cursor::new(data), base_dir)
}
