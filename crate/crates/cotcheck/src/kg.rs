//! Triple store: load, index, and verbalize knowledge-graph triples.
//!
//! Triples are directed labeled edges. Equality and all lookups are
//! case-fold + whitespace-trim normalized, because the surface forms in
//! question datasets and model output rarely agree on casing. The graph is
//! immutable after load and safe to share across threads.
//!
//! File format: one triple per line, three tab-separated UTF-8 fields
//! (head, relation, tail). Lines starting with `#` are comments; blank
//! lines are skipped. An optional sidecar label map (two tab-separated
//! fields: id, label) rewrites entity labels at load time.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::BufRead;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Case-fold + trim; the equality key used everywhere in this crate.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// A graph node. `id` is the raw identifier from the source file; `label`
/// is the human-readable surface form (equal to `id` unless a label map
/// rewrote it).
#[derive(Debug, Clone)]
pub struct Entity {
    pub id: String,
    pub label: String,
}

impl Entity {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        let id = id.into();
        let label = label.into();
        Entity { id, label }
    }

    /// Entity whose id and label coincide.
    pub fn from_label(label: impl Into<String>) -> Self {
        let label = label.into();
        Entity {
            id: label.clone(),
            label,
        }
    }

    pub fn key(&self) -> String {
        normalize(&self.label)
    }
}

impl PartialEq for Entity {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Entity {}

impl Hash for Entity {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// A relation identifier, e.g. `location.country.languages_spoken`.
#[derive(Debug, Clone)]
pub struct Relation {
    pub name: String,
}

impl Relation {
    pub fn new(name: impl Into<String>) -> Self {
        Relation { name: name.into() }
    }

    pub fn key(&self) -> String {
        normalize(&self.name)
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl serde::Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.name.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Relation::new(String::deserialize(deserializer)?))
    }
}

/// A directed labeled edge (head, relation, tail).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub head: Entity,
    pub relation: Relation,
    pub tail: Entity,
}

impl Triple {
    pub fn new(head: Entity, relation: Relation, tail: Entity) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }

    /// Build a triple from three label strings (ids equal labels).
    pub fn from_labels(head: &str, relation: &str, tail: &str) -> Self {
        Triple {
            head: Entity::from_label(head),
            relation: Relation::new(relation),
            tail: Entity::from_label(tail),
        }
    }

    /// Normalized component key, used for dedup and membership.
    pub fn key(&self) -> (String, String, String) {
        (self.head.key(), self.relation.key(), self.tail.key())
    }

    /// Same triple with head and tail swapped; the relation is unchanged.
    pub fn reversed(&self) -> Triple {
        Triple {
            head: self.tail.clone(),
            relation: self.relation.clone(),
            tail: self.head.clone(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

impl serde::Serialize for Triple {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.head.label, &self.relation.name, &self.tail.label).serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Triple {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let (h, r, t) = <(String, String, String)>::deserialize(deserializer)?;
        Ok(Triple::from_labels(&h, &r, &t))
    }
}

/// The sentence form of a triple: `"<head> <relation> <tail>."`.
pub fn verbalize(t: &Triple) -> String {
    format!(
        "{} {} {}.",
        t.head.label.trim(),
        t.relation.name.trim(),
        t.tail.label.trim()
    )
}

/// Immutable triple set with adjacency indexes keyed by normalized entity.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    keys: HashSet<(String, String, String)>,
    out_adjacency: HashMap<String, Vec<usize>>,
    in_adjacency: HashMap<String, Vec<usize>>,
    entities: Vec<Entity>,
    entity_lookup: HashMap<String, usize>,
    relations: HashSet<String>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Self {
        let mut g = Self::new();
        for t in triples {
            g.insert(t);
        }
        g
    }

    /// Insert a triple; duplicates (after normalization) are dropped.
    pub fn insert(&mut self, t: Triple) -> bool {
        let key = t.key();
        if !self.keys.insert(key) {
            return false;
        }
        let idx = self.triples.len();
        self.register_entity(&t.head);
        self.register_entity(&t.tail);
        self.relations.insert(t.relation.key());
        self.out_adjacency.entry(t.head.key()).or_default().push(idx);
        self.in_adjacency.entry(t.tail.key()).or_default().push(idx);
        self.triples.push(t);
        true
    }

    fn register_entity(&mut self, e: &Entity) {
        if !self.entity_lookup.contains_key(&e.key()) {
            self.entity_lookup.insert(e.key(), self.entities.len());
            self.entities.push(e.clone());
        }
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.keys.contains(&t.key())
    }

    pub fn contains_entity(&self, e: &Entity) -> bool {
        self.entity_lookup.contains_key(&e.key())
    }

    /// Triples in insertion order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Entities in first-seen order (union of all heads and tails).
    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn outgoing(&self, e: &Entity) -> impl Iterator<Item = &Triple> {
        self.out_adjacency
            .get(&e.key())
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.triples[i])
    }

    pub fn incoming(&self, e: &Entity) -> impl Iterator<Item = &Triple> {
        self.in_adjacency
            .get(&e.key())
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.triples[i])
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Total adjacency entries across both maps; always `2 * triple_count`.
    pub fn adjacency_entry_count(&self) -> usize {
        self.out_adjacency.values().map(Vec::len).sum::<usize>()
            + self.in_adjacency.values().map(Vec::len).sum::<usize>()
    }

    /// Uniform draw from `entities \ exclude`, deterministic for a seed.
    pub fn sample_entity(&self, rng_seed: u64, exclude: &HashSet<Entity>) -> Result<Entity> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        self.sample_entity_with(&mut rng, exclude)
    }

    /// Same as [`sample_entity`](Self::sample_entity) but drawing from a
    /// caller-owned generator, for callers that need several draws.
    pub fn sample_entity_with<R: Rng>(
        &self,
        rng: &mut R,
        exclude: &HashSet<Entity>,
    ) -> Result<Entity> {
        let excluded_keys: HashSet<String> = exclude.iter().map(Entity::key).collect();
        let candidates: Vec<&Entity> = self
            .entities
            .iter()
            .filter(|e| !excluded_keys.contains(&e.key()))
            .collect();
        if candidates.is_empty() {
            return Err(Error::NoCandidate(
                "all entities excluded from sampling".into(),
            ));
        }
        let pick = rng.random_range(0..candidates.len());
        Ok(candidates[pick].clone())
    }
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

/// Parse an `id<TAB>label` sidecar file into a rewrite map.
pub fn load_label_map<R: BufRead>(source: R) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 2 tab-separated fields, got {}", fields.len()),
            });
        }
        map.insert(fields[0].trim().to_string(), fields[1].trim().to_string());
    }
    Ok(map)
}

/// Load a graph from a tab-separated triple stream. Each distinct triple is
/// stored exactly once; an empty source yields an empty graph.
pub fn load_triples<R: BufRead>(source: R) -> Result<KnowledgeGraph> {
    load_triples_with_labels(source, None)
}

/// Load a graph, rewriting entity labels through `label_map` when given.
/// Unmapped ids keep their raw field as the label.
pub fn load_triples_with_labels<R: BufRead>(
    source: R,
    label_map: Option<&HashMap<String, String>>,
) -> Result<KnowledgeGraph> {
    let mut g = KnowledgeGraph::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let entity = |raw: &str| -> Entity {
            let raw = raw.trim();
            match label_map.and_then(|m| m.get(raw)) {
                Some(label) => Entity::new(raw, label.clone()),
                None => Entity::from_label(raw),
            }
        };
        g.insert(Triple::new(
            entity(fields[0]),
            Relation::new(fields[1]),
            entity(fields[2]),
        ));
    }
    Ok(g)
}
