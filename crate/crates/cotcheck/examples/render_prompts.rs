//! Render all six prompt modes for one question.
//!
//! Run with: cargo run --example render_prompts

use cotcheck::kg::{Relation, Triple};
use cotcheck::llm::{render_prompt, PlanHint, PromptMode};

fn main() -> cotcheck::Result<()> {
    let question = "Who is the brother of Justin Bieber?";
    let answer = "Jaxon Bieber";
    let path = vec![
        Triple::from_labels("Justin Bieber", "child_of", "Jeremy Bieber"),
        Triple::from_labels("Jeremy Bieber", "father_of", "Jaxon Bieber"),
    ];
    let plan = PlanHint::new(vec![
        Relation::new("child_of"),
        Relation::new("father_of"),
    ]);

    for mode in PromptMode::ALL {
        let text = render_prompt(
            mode,
            question,
            mode.is_discriminative().then_some(answer),
            mode.is_discriminative().then_some(path.as_slice()),
            (mode == PromptMode::GenFewShotCotPlan).then_some(&plan),
        )?;
        println!("================ {} ({} bytes)", mode.name(), text.len());
        if mode == PromptMode::DiscZeroShot || mode == PromptMode::GenFewShotCotPlan {
            println!("{text}");
        } else {
            // Just the tail for the long few-shot prompts.
            let tail: Vec<&str> = text.lines().rev().take(8).collect();
            for line in tail.iter().rev() {
                println!("{line}");
            }
        }
        println!();
    }
    Ok(())
}
