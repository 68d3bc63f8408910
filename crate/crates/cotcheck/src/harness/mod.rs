//! End-to-end pipelines: index preparation, generative evaluation,
//! discriminative evaluation, and report emission.
//!
//! Questions run through a bounded worker pool; per-question failures are
//! isolated into errored rows and the run only aborts when more than half
//! the questions errored. All aggregation happens after the join point, so
//! a fixed config plus a replay store reproduces a report byte for byte.

pub mod report;

pub use report::{
    aggregate_rows, aggregate_self_consistency, precision_recall_f1, recompute_disc_aggregates,
    recompute_gen_aggregates, Counts, DiscReport, DiscRow, DiscSummary, ErrorKinds, Facet,
    GenReport, GenRow, GenSummary, KindAccuracy, PrfScores,
};

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::embed::EmbeddingProvider;
use crate::error::{Error, Result};
use crate::eval::{answer_match, evaluate_path, fine_grained, EvalConfig, DEFAULT_SIGMA};
use crate::ground_truth::{extract_paths, load_dataset, QuestionRecord, DEFAULT_MAX_HOPS};
use crate::index::{build_index, load_index_expecting, save_index, TripleIndex};
use crate::kg::{load_triples, KnowledgeGraph};
use crate::llm::{
    parse_discriminative_verdict, render_prompt, ChatClient, GenerationConfig, PlanHint,
    PromptMode, YesNo,
};
use crate::parser::{classify_text, ResponseClass};
use crate::perturb::Label;
use crate::retrieval::{construct_path, DEFAULT_TOP_K};

/// Everything one evaluation run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Question dataset (generative) or discriminative item file.
    pub dataset: PathBuf,
    /// Optional global KG; defaults to the union of question subgraphs.
    pub kg: Option<PathBuf>,
    /// Index file to load, or to write after building.
    pub index: Option<PathBuf>,
    pub mode: PromptMode,
    pub generation: GenerationConfig,
    pub sigma: f64,
    pub top_k: usize,
    pub seed: u64,
    /// Forces four samples per question with any-success aggregation.
    pub self_consistency: bool,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, mode: PromptMode, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset: dataset.into(),
            kg: None,
            index: None,
            mode,
            generation: GenerationConfig::new("unspecified"),
            sigma: DEFAULT_SIGMA,
            top_k: DEFAULT_TOP_K,
            seed: 0,
            self_consistency: false,
            out_dir: out_dir.into(),
            workers: 1,
        }
    }

    fn effective_samples(&self) -> usize {
        if self.self_consistency {
            4
        } else {
            self.generation.samples
        }
    }

    fn check_paths(&self) -> Result<()> {
        if !self.dataset.exists() {
            return Err(Error::Config(format!(
                "dataset file does not exist: {}",
                self.dataset.display()
            )));
        }
        if let Some(kg) = &self.kg {
            if !kg.exists() {
                return Err(Error::Config(format!(
                    "KG file does not exist: {}",
                    kg.display()
                )));
            }
        }
        Ok(())
    }
}

/// Order-preserving map over items with up to `workers` threads.
pub(crate) fn parallel_map<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<U>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let out = f(&items[i]);
                *slots[i].lock().expect("result slot") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("slot filled"))
        .collect()
}

/// Load the index from `cfg.index` when present, otherwise build it from
/// the KG (explicit file or union of subgraphs) and save it if an index
/// path was given.
pub fn prepare_index(
    cfg: &RunConfig,
    questions: &[QuestionRecord],
    provider: &dyn EmbeddingProvider,
) -> Result<TripleIndex> {
    if let Some(path) = &cfg.index {
        if path.exists() {
            let mut reader = BufReader::new(File::open(path)?);
            let (index, warning) = load_index_expecting(&mut reader, Some(provider.tag()))?;
            if let Some(w) = warning {
                eprintln!("warning: {w}");
            }
            return Ok(index);
        }
    }
    let graph = match &cfg.kg {
        Some(path) => load_triples(BufReader::new(File::open(path)?))?,
        None => {
            let mut g = KnowledgeGraph::new();
            for q in questions {
                for t in q.subgraph.triples() {
                    g.insert(t.clone());
                }
            }
            g
        }
    };
    if graph.triple_count() == 0 {
        return Err(Error::Config("no triples available to index".into()));
    }
    let index = build_index(&graph, provider, 64)?;
    if let Some(path) = &cfg.index {
        let mut file = File::create(path)?;
        save_index(&index, &mut file)?;
    }
    Ok(index)
}

fn errored_row(qid: &str, sample: usize, msg: String) -> GenRow {
    GenRow {
        question_id: qid.to_string(),
        sample_index: sample,
        response_class: "errored".into(),
        verdict: None,
        answer_correct: false,
        alignment: None,
        error: Some(msg),
    }
}

fn evaluate_question(
    q: &QuestionRecord,
    cfg: &RunConfig,
    eval_cfg: &EvalConfig,
    gen_cfg: &GenerationConfig,
    index: &TripleIndex,
    provider: &dyn EmbeddingProvider,
    client: &ChatClient,
) -> Vec<GenRow> {
    let gts = match extract_paths(q, DEFAULT_MAX_HOPS) {
        Ok(gts) => gts,
        Err(e) => return vec![errored_row(&q.id, 0, format!("ground truth: {e}"))],
    };
    let plan = if cfg.mode == PromptMode::GenFewShotCotPlan {
        match gts.first() {
            Some(p) => Some(PlanHint::new(p.relations())),
            None => {
                return vec![errored_row(
                    &q.id,
                    0,
                    "no ground-truth path to derive a plan hint".into(),
                )]
            }
        }
    } else {
        None
    };
    let prompt = match render_prompt(cfg.mode, &q.question, None, None, plan.as_ref()) {
        Ok(p) => p,
        Err(e) => return vec![errored_row(&q.id, 0, format!("prompt: {e}"))],
    };
    let texts = match client.complete(&prompt, gen_cfg) {
        Ok(t) => t,
        Err(e) => return vec![errored_row(&q.id, 0, format!("completion: {e}"))],
    };
    let gold = q.answer_labels();
    texts
        .iter()
        .enumerate()
        .map(|(sample, text)| match classify_text(text) {
            ResponseClass::Abstained => GenRow {
                question_id: q.id.clone(),
                sample_index: sample,
                response_class: "abstained".into(),
                verdict: None,
                answer_correct: false,
                alignment: None,
                error: None,
            },
            ResponseClass::Unstructured => GenRow {
                question_id: q.id.clone(),
                sample_index: sample,
                response_class: "unstructured".into(),
                verdict: None,
                answer_correct: false,
                alignment: None,
                error: None,
            },
            ResponseClass::Structured(cot) => {
                let path = match construct_path(&cot.steps, index, provider, cfg.top_k) {
                    Ok(p) => p,
                    Err(e) => return errored_row(&q.id, sample, format!("grounding: {e}")),
                };
                let verdict =
                    match evaluate_path(&path, Some(&cot.final_answer), q, eval_cfg) {
                        Ok(v) => v,
                        Err(e) => return errored_row(&q.id, sample, format!("verdict: {e}")),
                    };
                let alignment = if gts.is_empty() {
                    None
                } else {
                    fine_grained(&path, &gts).ok()
                };
                GenRow {
                    question_id: q.id.clone(),
                    sample_index: sample,
                    response_class: "structured".into(),
                    verdict: Some(verdict),
                    answer_correct: answer_match(&cot.final_answer, &gold),
                    alignment,
                    error: None,
                }
            }
        })
        .collect()
}

/// Generative evaluation: prompt, sample, classify, ground, judge, align,
/// aggregate, and serialize the report into `cfg.out_dir`.
pub fn run_generative(
    cfg: &RunConfig,
    client: &ChatClient,
    provider: &dyn EmbeddingProvider,
) -> Result<GenReport> {
    cfg.check_paths()?;
    let eval_cfg = EvalConfig::new(cfg.sigma)?;
    let mut gen_cfg = cfg.generation.clone();
    gen_cfg.samples = cfg.effective_samples();
    gen_cfg.validate()?;

    let load = load_dataset(&cfg.dataset)?;
    for line in &load.skipped {
        eprintln!("skipped: {line}");
    }
    let questions = load.records;
    let index = prepare_index(cfg, &questions, provider)?;

    let per_question: Vec<Vec<GenRow>> = parallel_map(&questions, cfg.workers, |q| {
        evaluate_question(q, cfg, &eval_cfg, &gen_cfg, &index, provider, client)
    });
    let rows: Vec<GenRow> = per_question.into_iter().flatten().collect();

    let base = GenSummary {
        mode: cfg.mode.name().to_string(),
        model: gen_cfg.model.clone(),
        sigma: cfg.sigma,
        top_k: cfg.top_k,
        samples: gen_cfg.samples,
        seed: cfg.seed,
        self_consistency: gen_cfg.samples > 1,
        questions: 0,
        errored_questions: 0,
        counts: Counts::default(),
        answer: precision_recall_f1(&Counts::default(), Facet::Answer),
        reasoning: precision_recall_f1(&Counts::default(), Facet::Reasoning),
        gap: 0.0,
        mean_normalized_edit: None,
        error_kinds: ErrorKinds::default(),
    };
    let summary = recompute_gen_aggregates(&rows, &base);
    if summary.questions > 0 && summary.errored_questions * 2 > summary.questions {
        return Err(Error::RunFailed(format!(
            "{} of {} questions errored",
            summary.errored_questions, summary.questions
        )));
    }
    let report = GenReport { rows, summary };
    report::write_gen_report(&cfg.out_dir, &report)?;
    Ok(report)
}

fn label_matches(label: Label, verdict: YesNo) -> bool {
    matches!(
        (label, verdict),
        (Label::YES, YesNo::Yes) | (Label::NO, YesNo::No)
    )
}

/// Discriminative evaluation: render the mode's prompt per labeled item,
/// sample once, parse YES/NO, and score accuracy overall and per kind.
pub fn run_discriminative(cfg: &RunConfig, client: &ChatClient) -> Result<DiscReport> {
    cfg.check_paths()?;
    if !cfg.mode.is_discriminative() {
        return Err(Error::Config(format!(
            "mode {} is not a discriminative prompt mode",
            cfg.mode.name()
        )));
    }
    let mut gen_cfg = cfg.generation.clone();
    gen_cfg.samples = 1;
    gen_cfg.validate()?;

    let items = crate::perturb::load_items(BufReader::new(File::open(&cfg.dataset)?))?;
    let rows: Vec<DiscRow> = parallel_map(&items, cfg.workers, |item| {
        let prompt = match render_prompt(
            cfg.mode,
            &item.question,
            Some(&item.answer),
            Some(&item.path),
            None,
        ) {
            Ok(p) => p,
            Err(e) => {
                return DiscRow {
                    question_id: item.question_id.clone(),
                    kind: item.kind,
                    label: item.label,
                    predicted: None,
                    correct: None,
                    error: Some(format!("prompt: {e}")),
                }
            }
        };
        match client.complete(&prompt, &gen_cfg) {
            Ok(texts) => {
                let predicted = texts.first().and_then(|t| parse_discriminative_verdict(t));
                DiscRow {
                    question_id: item.question_id.clone(),
                    kind: item.kind,
                    label: item.label,
                    predicted,
                    correct: predicted.map(|v| label_matches(item.label, v)),
                    error: None,
                }
            }
            Err(e) => DiscRow {
                question_id: item.question_id.clone(),
                kind: item.kind,
                label: item.label,
                predicted: None,
                correct: None,
                error: Some(format!("completion: {e}")),
            },
        }
    });

    let base = DiscSummary {
        mode: cfg.mode.name().to_string(),
        model: gen_cfg.model.clone(),
        items: 0,
        errored_items: 0,
        unparseable: 0,
        overall_accuracy: 0.0,
        overall_flagged: false,
        per_kind: Vec::new(),
    };
    let summary = recompute_disc_aggregates(&rows, &base);
    if summary.items > 0 && summary.errored_items * 2 > summary.items {
        return Err(Error::RunFailed(format!(
            "{} of {} items errored",
            summary.errored_items, summary.items
        )));
    }
    let report = DiscReport { rows, summary };
    report::write_disc_report(&cfg.out_dir, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<usize> = (0..97).collect();
        let out = parallel_map(&items, 8, |&i| i * 3);
        assert_eq!(out, items.iter().map(|&i| i * 3).collect::<Vec<_>>());
    }

    #[test]
    fn parallel_map_single_worker_is_sequential() {
        let items = vec!["a", "b", "c"];
        let out = parallel_map(&items, 1, |s| s.to_uppercase());
        assert_eq!(out, vec!["A", "B", "C"]);
    }
}
