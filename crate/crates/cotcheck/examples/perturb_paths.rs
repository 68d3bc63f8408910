//! Generate the three invalid-path kinds used by discriminative probes:
//! entity corruption (factual error), triple shuffling (incoherence), and
//! paths borrowed from other questions (misguided).
//!
//! Run with: cargo run --example perturb_paths

use cotcheck::ground_truth::load_dataset;
use cotcheck::kg::KnowledgeGraph;
use cotcheck::llm::verbalize_path_for_prompt;
use cotcheck::oracles::fixtures::fixture_dir;
use cotcheck::perturb::{build_discriminative_set, ItemKind, Label, MixSpec};

fn main() -> cotcheck::Result<()> {
    let questions = load_dataset(&fixture_dir("replay10").join("questions.jsonl"))?.records;
    let mut kg = KnowledgeGraph::new();
    for q in &questions {
        for t in q.subgraph.triples() {
            kg.insert(t.clone());
        }
    }

    let set = build_discriminative_set(&questions, &kg, 7, MixSpec::default())?;
    println!(
        "{} items generated, {} skipped",
        set.items.len(),
        set.skipped.len()
    );
    for reason in &set.skipped {
        println!("  skipped: {reason}");
    }

    // Show one item of each kind for the first multi-hop question.
    for kind in [
        ItemKind::Valid,
        ItemKind::FactualError,
        ItemKind::Incoherent,
        ItemKind::Misguided,
    ] {
        let item = set
            .items
            .iter()
            .find(|i| i.question_id == "q01" && i.kind == kind)
            .unwrap();
        println!(
            "\n[{:?}] label {:?} — {}",
            item.kind,
            item.label,
            item.question
        );
        println!("{}", verbalize_path_for_prompt(&item.path));
    }

    let yes = set.items.iter().filter(|i| i.label == Label::YES).count();
    println!("\nlabel balance: {yes} YES / {} NO", set.items.len() - yes);
    Ok(())
}
