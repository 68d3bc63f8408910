//! Classification and parsing of raw LLM responses.
//!
//! A response is exactly one of: abstained (guardrail keywords),
//! structured (numbered steps plus an answer line), or unstructured
//! (everything else). Abstention wins over structure, because guardrail
//! replies sometimes include partial step lists.

use std::io::BufRead;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Keyword phrases that mark an abstained response. Matching is
/// case-insensitive substring containment.
pub const ABSTENTION_KEYWORDS: [&str; 10] = [
    "not have knowledge",
    "more information",
    "need more",
    "unknown",
    "cannot",
    "sorry",
    "impossible",
    "not possible",
    "unable",
    "unclear",
];

/// One raw model output for a question. `sample_index` distinguishes
/// self-consistency samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawResponse {
    pub question_id: String,
    pub sample_index: usize,
    pub text: String,
}

/// A structured CoT: numbered step bodies plus the final answer text. The
/// answer may hold several comma-separated values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedCoT {
    pub steps: Vec<String>,
    pub final_answer: String,
}

impl ParsedCoT {
    /// Split a multi-answer conclusion like `(Erica Campbell, Tina
    /// Campbell)` into its parts.
    pub fn answers(&self) -> Vec<String> {
        self.final_answer
            .split(", ")
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// Re-render in the canonical structured format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", i + 1, step));
        }
        out.push_str(&format!("So the answer is ({}).", self.final_answer));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ResponseClass {
    Abstained,
    Unstructured,
    Structured(ParsedCoT),
}

impl ResponseClass {
    pub fn name(&self) -> &'static str {
        match self {
            ResponseClass::Abstained => "abstained",
            ResponseClass::Unstructured => "unstructured",
            ResponseClass::Structured(_) => "structured",
        }
    }
}

/// True when the case-folded text contains any abstention keyword.
pub fn detect_abstained(text: &str) -> bool {
    let lower = text.to_lowercase();
    ABSTENTION_KEYWORDS.iter().any(|kw| lower.contains(kw))
}

static ANSWER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[Tt]he answer(?: to the question)? is:?\s+(.*)").expect("answer pattern")
});

/// Pull the final answer out of an answer line such as
/// `So the answer is (Brazilian real).`; the last occurrence wins. The
/// captured text is trimmed of surrounding parentheses, a trailing period,
/// and whitespace. Returns `None` when no line matches or the answer is
/// empty.
pub fn extract_answer(text: &str) -> Option<String> {
    let m = ANSWER_RE.captures_iter(text).last()?;
    let mut ans = m.get(1).map_or("", |g| g.as_str()).trim();
    ans = ans.strip_suffix('.').unwrap_or(ans);
    ans = ans.strip_suffix(')').unwrap_or(ans);
    ans = ans.strip_prefix('(').unwrap_or(ans);
    let ans = ans.trim();
    if ans.is_empty() {
        None
    } else {
        Some(ans.to_string())
    }
}

static STEP_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(\d+)\.\s+(.*\S)\s*$").expect("step pattern"));

/// Collect the first run of numbered lines `1. ...`, `2. ...`, strictly
/// consecutive from 1, and return the step bodies with the numbering
/// stripped. Returns `None` when no such run exists.
pub fn parse_steps(text: &str) -> Option<Vec<String>> {
    let mut steps: Vec<String> = Vec::new();
    let mut expected = 1usize;
    for line in text.lines() {
        match STEP_RE.captures(line) {
            Some(caps) => {
                let n: usize = caps[1].parse().ok()?;
                if n == expected {
                    steps.push(caps[2].trim_end().to_string());
                    expected += 1;
                } else if expected > 1 {
                    break; // run ended on a misnumbered line
                }
            }
            None => {
                if expected > 1 {
                    break; // run ended on a non-step line
                }
            }
        }
    }
    if steps.is_empty() {
        None
    } else {
        Some(steps)
    }
}

/// Assign exactly one class to a response. Abstained takes precedence;
/// a response is structured only when both the step run and the answer
/// line parse.
pub fn classify_response(r: &RawResponse) -> ResponseClass {
    classify_text(&r.text)
}

pub fn classify_text(text: &str) -> ResponseClass {
    if detect_abstained(text) {
        return ResponseClass::Abstained;
    }
    match (parse_steps(text), extract_answer(text)) {
        (Some(steps), Some(final_answer)) => ResponseClass::Structured(ParsedCoT {
            steps,
            final_answer,
        }),
        _ => ResponseClass::Unstructured,
    }
}

/// Load a line-delimited response corpus.
pub fn load_response_corpus<R: BufRead>(source: R) -> Result<Vec<RawResponse>> {
    let mut out = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: RawResponse = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}
