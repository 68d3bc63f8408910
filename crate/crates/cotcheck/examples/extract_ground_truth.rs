//! Extract ground-truth reasoning paths from question subgraphs.
//!
//! Traversal is bidirectional: an edge walked against its direction is
//! emitted with head and tail swapped, which is how the sample below finds
//! a path that starts on the target side of an edge.
//!
//! Run with: cargo run --example extract_ground_truth

use cotcheck::ground_truth::{extract_paths, load_dataset, validate_path};
use cotcheck::oracles::fixtures::{appendix_a_question, fixture_dir};

fn main() -> cotcheck::Result<()> {
    // A subgraph where the topic entity m.02g__4 only has an incoming
    // edge; the extracted path renders that first hop swapped.
    let q = appendix_a_question();
    let paths = extract_paths(&q, 4)?;
    println!("subgraph with {} triples:", q.subgraph.triple_count());
    for t in q.subgraph.triples() {
        println!("  {t}");
    }
    println!("\npaths from {:?} to {:?}:", q.topic_entities[0].label, q.answer_entities[0].label);
    for p in &paths {
        for (i, step) in p.steps.iter().enumerate() {
            println!("  step {}: {}", i + 1, step);
        }
        println!("  validates: {}", validate_path(p, &q));
    }

    // The same operation over a whole dataset file.
    let load = load_dataset(&fixture_dir("replay10").join("questions.jsonl"))?;
    println!("\ndataset: {} questions", load.records.len());
    for q in &load.records {
        let paths = extract_paths(q, 4)?;
        println!(
            "  {}: {} path(s), first has {} hop(s)",
            q.id,
            paths.len(),
            paths.first().map(|p| p.len()).unwrap_or(0)
        );
    }
    Ok(())
}
