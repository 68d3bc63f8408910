//! Full generative evaluation with record/replay: the first run records
//! scripted completions, the second replays them byte-for-byte without an
//! endpoint.
//!
//! Run with: cargo run --example generative_eval

use std::io::BufReader;

use cotcheck::embed::TrigramEmbedder;
use cotcheck::ground_truth::load_dataset;
use cotcheck::harness::{run_generative, RunConfig};
use cotcheck::llm::{ChatClient, GenerationConfig, PromptMode, ReplayStore};
use cotcheck::oracles::fixtures::{corpus_endpoint, fixture_dir};
use cotcheck::parser::load_response_corpus;

fn main() -> cotcheck::Result<()> {
    let dir = fixture_dir("replay10");
    let questions = load_dataset(&dir.join("questions.jsonl"))?.records;
    let corpus = load_response_corpus(BufReader::new(std::fs::File::open(
        dir.join("responses.jsonl"),
    )?))?;

    let work = std::env::temp_dir().join("cotcheck-gen-example");
    let _ = std::fs::remove_dir_all(&work);
    std::fs::create_dir_all(&work)?;

    let run = |out: &str, client: ChatClient| -> cotcheck::Result<_> {
        let mut cfg = RunConfig::new(
            dir.join("questions.jsonl"),
            PromptMode::GenFewShotCot,
            work.join(out),
        );
        cfg.generation = GenerationConfig::new("scripted-model");
        run_generative(&cfg, &client, &TrigramEmbedder::new())
    };

    let store = ReplayStore::open(work.join("store"))?;
    let endpoint = corpus_endpoint(&questions, &corpus);
    let recorded = run("recorded", ChatClient::Record(Box::new(endpoint), store))?;

    let replayed = run(
        "replayed",
        ChatClient::Replay(ReplayStore::open(work.join("store"))?),
    )?;
    println!(
        "replay reproduces the recorded report: {}",
        recorded.rows == replayed.rows && recorded.summary == replayed.summary
    );

    let s = &recorded.summary;
    println!("\nquestions: {} (errored {})", s.questions, s.errored_questions);
    println!(
        "classes: FR {}  UR {}  abstained {}  unstructured {}",
        s.counts.fr, s.counts.ur, s.counts.abstained, s.counts.unstructured
    );
    println!(
        "answer    P {:.4}  R {:.4}  F1 {:.4}",
        s.answer.precision, s.answer.recall, s.answer.f1
    );
    println!(
        "reasoning P {:.4}  R {:.4}  F1 {:.4}",
        s.reasoning.precision, s.reasoning.recall, s.reasoning.f1
    );
    println!("gap (answer F1 - reasoning F1): {:.4}", s.gap);
    if let Some(e) = s.mean_normalized_edit {
        println!("mean normalized edit distance: {e:.2}");
    }
    println!(
        "error kinds: factual {}  coherence {}  answer {}",
        s.error_kinds.factual_error, s.error_kinds.coherence_error, s.error_kinds.answer_error
    );
    println!("\nreport files in {}", work.join("recorded").display());
    Ok(())
}
