//! Prompt rendering and the chat-completion driver.
//!
//! Six prompt modes: four discriminative probes (zero/few-shot, each with
//! and without CoT) and two generative modes (few-shot CoT, and few-shot
//! CoT with a relation-path HINT). Templates are fixed; rendering only
//! substitutes the question, answer, reasoning path, and plan slots.

mod client;
mod replay;

pub use client::{ChatEndpoint, GenerationConfig, HttpChatClient, ScriptedEndpoint};
pub use replay::{ChatClient, ReplayStore};

use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::kg::{Relation, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    DiscZeroShot,
    DiscZeroShotCot,
    DiscFewShot,
    DiscFewShotCot,
    GenFewShotCot,
    GenFewShotCotPlan,
}

impl PromptMode {
    pub const ALL: [PromptMode; 6] = [
        PromptMode::DiscZeroShot,
        PromptMode::DiscZeroShotCot,
        PromptMode::DiscFewShot,
        PromptMode::DiscFewShotCot,
        PromptMode::GenFewShotCot,
        PromptMode::GenFewShotCotPlan,
    ];

    pub fn is_discriminative(&self) -> bool {
        !matches!(self, PromptMode::GenFewShotCot | PromptMode::GenFewShotCotPlan)
    }

    fn template(&self) -> &'static str {
        match self {
            PromptMode::DiscZeroShot => include_str!("templates/disc_zero_shot.txt"),
            PromptMode::DiscZeroShotCot => include_str!("templates/disc_zero_shot_cot.txt"),
            PromptMode::DiscFewShot => include_str!("templates/disc_few_shot.txt"),
            PromptMode::DiscFewShotCot => include_str!("templates/disc_few_shot_cot.txt"),
            PromptMode::GenFewShotCot => include_str!("templates/gen_few_shot_cot.txt"),
            PromptMode::GenFewShotCotPlan => include_str!("templates/gen_few_shot_cot_plan.txt"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PromptMode::DiscZeroShot => "disc_zero_shot",
            PromptMode::DiscZeroShotCot => "disc_zero_shot_cot",
            PromptMode::DiscFewShot => "disc_few_shot",
            PromptMode::DiscFewShotCot => "disc_few_shot_cot",
            PromptMode::GenFewShotCot => "gen_few_shot_cot",
            PromptMode::GenFewShotCotPlan => "gen_few_shot_cot_plan",
        }
    }
}

impl std::str::FromStr for PromptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "disc_zero_shot" | "zero-shot" => PromptMode::DiscZeroShot,
            "disc_zero_shot_cot" | "zero-shot-cot" => PromptMode::DiscZeroShotCot,
            "disc_few_shot" | "few-shot" => PromptMode::DiscFewShot,
            "disc_few_shot_cot" | "few-shot-cot" => PromptMode::DiscFewShotCot,
            "gen_few_shot_cot" | "cot" => PromptMode::GenFewShotCot,
            "gen_few_shot_cot_plan" | "cot-plan" => PromptMode::GenFewShotCotPlan,
            other => return Err(Error::Config(format!("unknown prompt mode '{other}'"))),
        })
    }
}

/// A ground-truth relation path injected as the HINT line in CoT-Plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanHint {
    pub relations: Vec<Relation>,
}

impl PlanHint {
    pub fn new(relations: Vec<Relation>) -> Self {
        PlanHint { relations }
    }

    pub fn render(&self) -> String {
        self.relations
            .iter()
            .map(|r| r.name.clone())
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

/// One `Step i: head -> relation -> tail` line per triple.
pub fn verbalize_path_for_prompt(path: &[Triple]) -> String {
    path.iter()
        .enumerate()
        .map(|(i, t)| {
            format!(
                "Step {}: {} -> {} -> {}",
                i + 1,
                t.head.label,
                t.relation.name,
                t.tail.label
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Single-line rendering `e0 -> r1 -> e1 -> ... -> rl -> el`.
pub fn verbalize_path_inline(path: &[Triple]) -> String {
    let mut parts = Vec::new();
    for (i, t) in path.iter().enumerate() {
        if i == 0 {
            parts.push(t.head.label.clone());
        }
        parts.push(t.relation.name.clone());
        parts.push(t.tail.label.clone());
    }
    parts.join(" -> ")
}

/// Instantiate a mode's template. Discriminative modes require the answer
/// and path; CoT-Plan requires the plan. A missing slot is an error naming
/// the slot.
pub fn render_prompt(
    mode: PromptMode,
    question: &str,
    answer: Option<&str>,
    path: Option<&[Triple]>,
    plan: Option<&PlanHint>,
) -> Result<String> {
    let template = mode.template();
    let mut text = template.replace("<Question>", question);
    if mode.is_discriminative() {
        let answer = answer.ok_or_else(|| Error::Template("Answer".into()))?;
        let path = path.ok_or_else(|| Error::Template("Reasoning Path".into()))?;
        text = text.replace("<Answer>", answer);
        text = text.replace("<Reasoning Path>", &verbalize_path_for_prompt(path));
    } else if mode == PromptMode::GenFewShotCotPlan {
        let plan = plan.ok_or_else(|| Error::Template("Plan".into()))?;
        if plan.relations.is_empty() {
            return Err(Error::Template("Plan".into()));
        }
        text = text.replace("<Plan>", &plan.render());
    }
    Ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YesNo {
    Yes,
    No,
}

static TOKEN_RE: LazyLock<regex::Regex> =
    LazyLock::new(|| regex::Regex::new(r"(?i)\b(yes|no)\b").expect("token pattern"));
static CONCLUSION_RE: LazyLock<regex::Regex> = LazyLock::new(|| {
    regex::Regex::new(r#"(?i)answer\s+is\s*:?\s*"?(yes|no)\b"#).expect("conclusion pattern")
});

/// Read a YES/NO verdict out of a response. A single token kind decides
/// directly; when both appear, the last `The answer is "..."` conclusion
/// decides; otherwise the response is ambiguous and yields `None`.
pub fn parse_discriminative_verdict(text: &str) -> Option<YesNo> {
    let to_verdict = |s: &str| {
        if s.eq_ignore_ascii_case("yes") {
            YesNo::Yes
        } else {
            YesNo::No
        }
    };
    let tokens: Vec<YesNo> = TOKEN_RE
        .captures_iter(text)
        .map(|c| to_verdict(&c[1]))
        .collect();
    if tokens.is_empty() {
        return None;
    }
    if tokens.iter().all(|&t| t == tokens[0]) {
        return Some(tokens[0]);
    }
    CONCLUSION_RE
        .captures_iter(text)
        .last()
        .map(|c| to_verdict(&c[1]))
}
