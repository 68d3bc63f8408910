//! The core verification loop on four hand-picked CoTs, one per verdict:
//! parse the response, ground each step to its best KG triple, judge the
//! grounded path, and align it against ground truth.
//!
//! Run with: cargo run --example ground_and_judge

use std::io::BufReader;

use cotcheck::embed::TrigramEmbedder;
use cotcheck::eval::{evaluate_path, fine_grained, EvalConfig};
use cotcheck::ground_truth::{extract_paths, load_dataset};
use cotcheck::index::build_index;
use cotcheck::kg::KnowledgeGraph;
use cotcheck::oracles::fixtures::fixture_dir;
use cotcheck::parser::{classify_text, load_response_corpus, ResponseClass};
use cotcheck::retrieval::construct_path;

fn main() -> cotcheck::Result<()> {
    let dir = fixture_dir("replay10");
    let questions = load_dataset(&dir.join("questions.jsonl"))?.records;
    let corpus = load_response_corpus(BufReader::new(std::fs::File::open(
        dir.join("responses.jsonl"),
    )?))?;

    let mut kg = KnowledgeGraph::new();
    for q in &questions {
        for t in q.subgraph.triples() {
            kg.insert(t.clone());
        }
    }
    let provider = TrigramEmbedder::new();
    let index = build_index(&kg, &provider, 32)?;
    let cfg = EvalConfig::default(); // sigma 0.7

    // One showcase per verdict label.
    for qid in ["q01", "q02", "q03", "q04"] {
        let q = questions.iter().find(|q| q.id == qid).unwrap();
        let text = &corpus.iter().find(|r| r.question_id == qid).unwrap().text;
        println!("== {} — {}", q.id, q.question);

        let ResponseClass::Structured(cot) = classify_text(text) else {
            println!("   (not structured)");
            continue;
        };
        let path = construct_path(&cot.steps, &index, &provider, 10)?;
        for (i, g) in path.groundings.iter().enumerate() {
            println!(
                "   step {}: {:<55} -> {}  (score {:.2})",
                i + 1,
                truncate(&g.step_text, 55),
                g.triple,
                g.final_score
            );
        }
        let verdict = evaluate_path(&path, Some(&cot.final_answer), q, &cfg)?;
        println!("   verdict: {} — {}", verdict.label, verdict.evidence);

        let gts = extract_paths(q, 4)?;
        let alignment = fine_grained(&path, &gts)?;
        println!(
            "   alignment vs ground truth: edit {}, match rate {:.2}, normalized {:.1}",
            alignment.edit_distance, alignment.match_rate, alignment.normalized_edit
        );
        println!();
    }
    Ok(())
}

fn truncate(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        let cut: String = s.chars().take(n - 3).collect();
        format!("{cut}...")
    }
}
