//! Classify raw model responses: abstained, unstructured, or structured
//! (numbered steps plus an answer line).
//!
//! Run with: cargo run --example parse_responses

use cotcheck::parser::{classify_text, ResponseClass};

fn main() {
    let samples = [
        "1. Lou Seal is the mascot for the San Francisco Giants.\n2. The San Francisco Giants are associated with the sports championship event, the 2014 World Series.\nSo the answer is (2014 World Series).",
        "Sorry, I cannot determine the answer with the given facts.",
        "Paris is lovely in the spring, but the records are contradictory.",
        "1. Mary Mary has a member named Tina Campbell\n2. Mary Mary has a member named Erica Campbell\nSo the answer is (Erica Campbell, Tina Campbell).",
        "2. This list starts at two.\n3. So it does not parse as steps.\nSo the answer is (nothing).",
    ];

    for text in samples {
        println!("--- response ---");
        for line in text.lines().take(3) {
            println!("| {line}");
        }
        match classify_text(text) {
            ResponseClass::Structured(cot) => {
                println!(
                    "=> structured: {} step(s), answer {:?}",
                    cot.steps.len(),
                    cot.final_answer
                );
                if cot.answers().len() > 1 {
                    println!("   answer set: {:?}", cot.answers());
                }
            }
            other => println!("=> {}", other.name()),
        }
        println!();
    }
}
