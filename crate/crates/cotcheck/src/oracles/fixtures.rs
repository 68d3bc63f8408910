//! Deterministic offline fixtures: a desk-scale KG, synthetic step texts,
//! the four case-study verdicts, and scripted chat endpoints.

use std::collections::HashMap;
use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::eval::VerdictLabel;
use crate::ground_truth::{question, QuestionRecord};
use crate::kg::{KnowledgeGraph, Triple};
use crate::llm::ScriptedEndpoint;
use crate::parser::RawResponse;
use crate::perturb::{DiscriminativeItem, Label};
use crate::retrieval::{ReasoningPath, StepGrounding};

const ADJECTIVES: [&str; 20] = [
    "amber", "basalt", "cedar", "dusty", "ember", "fjord", "garnet", "hazel", "iron", "jade",
    "kelp", "lunar", "maple", "nickel", "onyx", "pearl", "quartz", "russet", "slate", "tidal",
];

const NOUNS: [&str; 10] = [
    "harbor", "meadow", "falcon", "garden", "island", "lantern", "mill", "orchard", "prairie",
    "ridge",
];

const RELATIONS: [&str; 8] = [
    "family.person.parent_of",
    "location.place.contained_by",
    "music.artist.recorded",
    "film.director.filmed_at",
    "sports.team.plays_in",
    "biology.species.found_in",
    "government.leader.governs",
    "book.author.wrote",
];

fn entity_label(i: usize) -> String {
    format!("{} {}", ADJECTIVES[i % 20], NOUNS[i / 4])
}

/// A 200-triple, 40-entity graph with wordy labels, produced the same way
/// every time.
pub fn desk_kg() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    for a in 0..40usize {
        for d in 1..=5usize {
            let b = (a + 4 * d) % 40;
            let rel = RELATIONS[(a + d) % 8];
            g.insert(Triple::from_labels(&entity_label(a), rel, &entity_label(b)));
        }
    }
    assert_eq!(g.triple_count(), 200);
    g
}

/// Synthetic reasoning-step texts over the desk KG: verbatim triple
/// sentences, paraphrases, partial mentions, and noise.
pub fn desk_step_texts(seed: u64, count: usize) -> Vec<String> {
    let g = desk_kg();
    let triples = g.triples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let t = &triples[rng.random_range(0..triples.len())];
            let head = &t.head.label;
            let tail = &t.tail.label;
            match rng.random_range(0..6) {
                0 => format!("{} {} {}.", head, t.relation.name, tail),
                1 => format!("The {head} is directly related to {tail}."),
                2 => format!("I think {head} connects with {tail} somehow."),
                3 => format!("{tail} was mentioned alongside {head} in the records."),
                4 => {
                    let prefix: String = tail.chars().take(4).collect();
                    format!("Some step about {} and the partial {prefix}", head.to_uppercase())
                }
                _ => format!("nothing conclusive to see here, note {i}"),
            }
        })
        .collect()
}

/// One curated verdict fixture: a grounded path with pinned scores and the
/// label the evaluator must produce.
pub struct CaseStudy {
    pub name: &'static str,
    pub question: QuestionRecord,
    pub path: ReasoningPath,
    pub final_answer: String,
    pub expected: VerdictLabel,
}

fn pinned(t: Triple, tau: f64, eh: f64, et: f64) -> StepGrounding {
    StepGrounding {
        step_text: String::new(),
        triple: t,
        cosine_sim: tau,
        head_match: eh,
        tail_match: et,
        final_score: (tau + eh + et) / 3.0,
    }
}

fn labels(h: &str, r: &str, t: &str) -> Triple {
    Triple::from_labels(h, r, t)
}

/// The four case studies: one per verdict label.
pub fn case_studies() -> Vec<CaseStudy> {
    let corfu_kg = KnowledgeGraph::from_triples([
        labels("Greece", "location.country.administrative_divisions", "Corfu"),
        labels("Greece", "location.country.languages_spoken", "Greek Language"),
    ]);
    let corfu = CaseStudy {
        name: "corfu",
        question: question(
            "case-corfu",
            "People from the country that contains Corfu speak what language?",
            &["Corfu"],
            &["Greek Language"],
            corfu_kg,
        ),
        path: ReasoningPath::new(vec![
            pinned(
                labels("Corfu", "location.country.administrative_divisions", "Greece"),
                0.7,
                1.0,
                1.0,
            ),
            pinned(
                labels("Greece", "location.country.languages_spoken", "Greek Language"),
                0.7,
                1.0,
                1.0,
            ),
        ]),
        final_answer: "Greek".into(),
        expected: VerdictLabel::Faithful,
    };

    let cruzado_kg = KnowledgeGraph::from_triples([
        labels("Brazilian cruzado", "location.country.currency_formerly_used", "Brazil"),
        labels("Brazil", "location.country.currency_used", "Brazilian real"),
    ]);
    let cruzado_triple = labels(
        "Brazilian cruzado",
        "location.country.currency_formerly_used",
        "Brazil",
    );
    let cruzado = CaseStudy {
        name: "brazilian-cruzado",
        question: question(
            "case-cruzado",
            "What is the currency in the country where the Brazilian cruzado is also used?",
            &["Brazilian cruzado"],
            &["Brazilian real"],
            cruzado_kg,
        ),
        path: ReasoningPath::new(vec![
            pinned(cruzado_triple.clone(), 0.7, 1.0, 1.0),
            pinned(cruzado_triple, 0.7, 1.0, 1.0),
        ]),
        final_answer: "Brazilian real".into(),
        expected: VerdictLabel::CoherenceError,
    };

    let rihanna_kg = KnowledgeGraph::from_triples([
        labels("Rihanna: Live in Concert Tour", "music.artist.concert_tours", "Rihanna"),
        labels("Rihanna", "people.person.place_of_birth", "Saint Michael Parish"),
        labels("Rihanna", "people.person.nationality", "Barbados"),
    ]);
    let rihanna = CaseStudy {
        name: "rihanna",
        question: question(
            "case-rihanna",
            "Where was the main artist featured in the Rihanna: Live in Concert Tour raised?",
            &["Rihanna: Live in Concert Tour"],
            &["Saint Michael Parish"],
            rihanna_kg,
        ),
        path: ReasoningPath::new(vec![
            pinned(
                labels("Rihanna: Live in Concert Tour", "music.artist.concert_tours", "Rihanna"),
                0.7,
                1.0,
                1.0,
            ),
            pinned(labels("Rihanna", "people.person.nationality", "Barbados"), 0.7, 1.0, 1.0),
        ]),
        final_answer: "Barbados".into(),
        expected: VerdictLabel::AnswerError,
    };

    let keller_kg = KnowledgeGraph::from_triples([
        labels("The story of my life", "book.author.book_editions_published", "Helen Keller"),
        labels("Helen Keller", "people.deceased_person.place_of_death", "Easton"),
    ]);
    let keller = CaseStudy {
        name: "helen-keller",
        question: question(
            "case-keller",
            "Where did the author who published \"The Story of My Life\" die?",
            &["The story of my life"],
            &["Easton"],
            keller_kg,
        ),
        path: ReasoningPath::new(vec![
            pinned(
                labels("The story of my life", "book.author.book_editions_published", "Helen Keller"),
                0.7,
                1.0,
                1.0,
            ),
            // The retrieval score reported for the hallucinated step.
            pinned(
                labels("Helen Keller", "people.deceased_person.place_of_death", "Easton"),
                0.71,
                0.5,
                0.5,
            ),
        ]),
        final_answer: "Connecticut, USA".into(),
        expected: VerdictLabel::FactualError,
    };

    vec![corfu, cruzado, rihanna, keller]
}

/// The worked subgraph-extraction example: a three-edge graph whose only
/// topic-to-answer path starts with a direction-swapped edge.
pub fn appendix_a_question() -> QuestionRecord {
    let g = KnowledgeGraph::from_triples([
        labels("m.03gyl", "location.country.administrative_divisions", "m.02g__4"),
        labels("m.03gyl", "location.country.languages_spoken", "m.02dhwl"),
        labels("m.03gyl", "location.country.languages_spoken", "m.064_8sq"),
    ]);
    question("construct-example", "?", &["m.02g__4"], &["m.02dhwl"], g)
}

/// Path to a fixture directory under the crate root.
pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn last_generative_question(prompt: &str) -> Option<&str> {
    prompt
        .lines()
        .rev()
        .find_map(|line| line.strip_prefix("Q: "))
}

/// Endpoint that answers generative prompts from a response corpus, keyed
/// by the final `Q:` line of the prompt.
pub fn corpus_endpoint(
    questions: &[QuestionRecord],
    corpus: &[RawResponse],
) -> ScriptedEndpoint {
    let text_to_id: HashMap<String, String> = questions
        .iter()
        .map(|q| (q.question.clone(), q.id.clone()))
        .collect();
    let mut by_id: HashMap<String, Vec<(usize, String)>> = HashMap::new();
    for r in corpus {
        by_id
            .entry(r.question_id.clone())
            .or_default()
            .push((r.sample_index, r.text.clone()));
    }
    for samples in by_id.values_mut() {
        samples.sort_by_key(|(i, _)| *i);
    }
    ScriptedEndpoint::new(move |prompt, cfg| {
        let qtext = last_generative_question(prompt)
            .ok_or_else(|| Error::Config("prompt has no trailing Q: line".into()))?;
        let qid = text_to_id
            .get(qtext)
            .ok_or_else(|| Error::Config(format!("unscripted question: {qtext}")))?;
        let samples = by_id
            .get(qid)
            .ok_or_else(|| Error::Config(format!("no scripted responses for {qid}")))?;
        if samples.len() < cfg.samples {
            return Err(Error::Config(format!(
                "question {qid} has {} scripted samples, {} requested",
                samples.len(),
                cfg.samples
            )));
        }
        Ok(samples
            .iter()
            .take(cfg.samples)
            .map(|(_, t)| t.clone())
            .collect())
    })
}

/// Endpoint that answers discriminative prompts with the true label. A
/// path's rendering cannot identify an item on its own (a misguided item
/// shares its text with the origin question's valid item), so items are
/// recognized by the (question, path) pair.
pub fn disc_oracle_endpoint(items: &[DiscriminativeItem]) -> ScriptedEndpoint {
    let by_key: HashMap<(String, String), Label> = items
        .iter()
        .map(|item| {
            (
                (
                    item.question.clone(),
                    crate::llm::verbalize_path_for_prompt(&item.path),
                ),
                item.label,
            )
        })
        .collect();
    ScriptedEndpoint::new(move |prompt, cfg| {
        let q_marker = "Question:\n";
        let q_start = prompt
            .rfind(q_marker)
            .ok_or_else(|| Error::Config("prompt has no question block".into()))?;
        let question = prompt[q_start + q_marker.len()..]
            .split("\n\n")
            .next()
            .unwrap_or_default()
            .trim_end()
            .to_string();
        let p_marker = "Reasoning path:\n";
        let p_start = prompt
            .rfind(p_marker)
            .ok_or_else(|| Error::Config("prompt has no reasoning path block".into()))?;
        let block = prompt[p_start + p_marker.len()..].trim_end();
        let block = block.strip_suffix("## Output:").unwrap_or(block).trim_end();
        let label = by_key
            .get(&(question.clone(), block.to_string()))
            .ok_or_else(|| Error::Config(format!("unscripted item: {question:?} / {block:?}")))?;
        let text = match label {
            Label::YES => "YES",
            Label::NO => "NO",
        };
        Ok(vec![text.to_string(); cfg.samples])
    })
}
