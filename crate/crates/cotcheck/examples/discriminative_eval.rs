//! Run the discriminative evaluation end to end against two scripted
//! models: an oracle that always knows the label, and a yes-sayer.
//!
//! Run with: cargo run --example discriminative_eval

use cotcheck::ground_truth::load_dataset;
use cotcheck::harness::{run_discriminative, RunConfig};
use cotcheck::kg::KnowledgeGraph;
use cotcheck::llm::{ChatClient, GenerationConfig, PromptMode, ScriptedEndpoint};
use cotcheck::oracles::fixtures::{disc_oracle_endpoint, fixture_dir};
use cotcheck::perturb::{build_discriminative_set, save_items, MixSpec};

fn main() -> cotcheck::Result<()> {
    let questions = load_dataset(&fixture_dir("replay10").join("questions.jsonl"))?.records;
    let mut kg = KnowledgeGraph::new();
    for q in &questions {
        for t in q.subgraph.triples() {
            kg.insert(t.clone());
        }
    }
    let set = build_discriminative_set(&questions, &kg, 11, MixSpec::default())?;

    let work = std::env::temp_dir().join("cotcheck-disc-example");
    std::fs::create_dir_all(&work)?;
    let items_path = work.join("items.jsonl");
    let mut buf = Vec::new();
    save_items(&set.items, &mut buf)?;
    std::fs::write(&items_path, buf)?;

    for (name, client) in [
        (
            "oracle model",
            ChatClient::Live(Box::new(disc_oracle_endpoint(&set.items))),
        ),
        (
            "always-YES model",
            ChatClient::Live(Box::new(ScriptedEndpoint::constant("The answer is \"YES\""))),
        ),
    ] {
        let mut cfg = RunConfig::new(&items_path, PromptMode::DiscFewShotCot, work.join(name.replace(' ', "-")));
        cfg.generation = GenerationConfig::new(name);
        let report = run_discriminative(&cfg, &client)?;
        println!("== {name}");
        println!(
            "   {} items, overall accuracy {:.3}, unparseable {}",
            report.summary.items, report.summary.overall_accuracy, report.summary.unparseable
        );
        for kind in &report.summary.per_kind {
            println!(
                "   {:>13?}: {:>2} items, accuracy {:.3}",
                kind.kind, kind.total, kind.accuracy
            );
        }
        println!();
    }
    Ok(())
}
