//! Thin command-line front end over the cotcheck library.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cotcheck::embed::{EmbeddingProvider, HttpEmbeddingProvider, TrigramEmbedder};
use cotcheck::error::{Error, Result};
use cotcheck::ground_truth::{extract_paths, load_dataset};
use cotcheck::harness::{self, RunConfig};
use cotcheck::index::{build_index, load_index, save_index};
use cotcheck::kg::{load_label_map, load_triples_with_labels};
use cotcheck::llm::{ChatClient, GenerationConfig, HttpChatClient, PromptMode, ReplayStore};
use cotcheck::perturb::{build_discriminative_set, save_items, MixSpec};

#[derive(Parser)]
#[command(name = "cotcheck", version, about = "Verify chain-of-thought reasoning against a knowledge graph")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or inspect a triple embedding index.
    Index {
        #[command(subcommand)]
        cmd: IndexCmd,
    },
    /// Ground-truth path extraction.
    Gt {
        #[command(subcommand)]
        cmd: GtCmd,
    },
    /// Discriminative dataset generation.
    Perturb {
        #[command(subcommand)]
        cmd: PerturbCmd,
    },
    /// Run an evaluation.
    Eval {
        #[command(subcommand)]
        cmd: EvalCmd,
    },
    /// Re-derive and print report aggregates.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
}

#[derive(clap::Args)]
struct EmbedderArgs {
    /// Embedding backend: "trigram" (offline) or "http".
    #[arg(long, default_value = "trigram")]
    embedder: String,
    /// Embedding endpoint URL for the http backend.
    #[arg(long)]
    embed_endpoint: Option<String>,
    /// Embedding model name for the http backend.
    #[arg(long, default_value = "sentence-embedder")]
    embed_model: String,
    /// Vector dimension for the http backend.
    #[arg(long, default_value_t = 384)]
    embed_dim: usize,
}

impl EmbedderArgs {
    fn provider(&self) -> Result<Box<dyn EmbeddingProvider>> {
        match self.embedder.as_str() {
            "trigram" => Ok(Box::new(TrigramEmbedder::new())),
            "http" => {
                let endpoint = self.embed_endpoint.clone().ok_or_else(|| {
                    Error::Config("--embed-endpoint is required with --embedder http".into())
                })?;
                Ok(Box::new(HttpEmbeddingProvider::from_env(
                    endpoint,
                    self.embed_model.clone(),
                    self.embed_dim,
                )))
            }
            other => Err(Error::Config(format!("unknown embedder '{other}'"))),
        }
    }
}

#[derive(Subcommand)]
enum IndexCmd {
    /// Embed every triple of a KG file and write the index.
    Build {
        /// Tab-separated triple file.
        #[arg(long)]
        kg: PathBuf,
        /// Optional id -> label sidecar map.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[command(flatten)]
        embedder: EmbedderArgs,
    },
    /// Print an index header and the first entries.
    Inspect {
        #[arg(long)]
        index: PathBuf,
    },
}

#[derive(Subcommand)]
enum GtCmd {
    /// Extract ground-truth paths for every question in a dataset.
    Extract {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_hops: usize,
        /// Output JSONL file (question_id, paths).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PerturbCmd {
    /// Build a labeled YES/NO discriminative item file.
    Build {
        #[arg(long)]
        dataset: PathBuf,
        /// Optional global KG; defaults to the union of subgraphs.
        #[arg(long)]
        kg: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct EndpointArgs {
    /// Chat-completion endpoint URL; credential via COTCHECK_API_KEY.
    #[arg(long)]
    endpoint: Option<String>,
    /// Record/replay directory. With --endpoint: record; alone: replay.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long, default_value = "unspecified-model")]
    model: String,
}

impl EndpointArgs {
    fn client(&self) -> Result<ChatClient> {
        match (&self.endpoint, &self.replay) {
            (Some(url), Some(dir)) => Ok(ChatClient::Record(
                Box::new(HttpChatClient::from_env(url.clone())),
                ReplayStore::open(dir)?,
            )),
            (Some(url), None) => Ok(ChatClient::Live(Box::new(HttpChatClient::from_env(
                url.clone(),
            )))),
            (None, Some(dir)) => Ok(ChatClient::Replay(ReplayStore::open(dir)?)),
            (None, None) => Err(Error::Config(
                "provide --endpoint for live runs and/or --replay for record/replay".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Discriminative evaluation over a perturbed item file.
    Disc {
        /// Discriminative item JSONL file.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "disc_zero_shot")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        endpoint: EndpointArgs,
    },
    /// Generative evaluation over a question dataset.
    Gen {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        kg: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, default_value = "gen_few_shot_cot")]
        mode: String,
        #[arg(long, default_value_t = 0.7)]
        sigma: f64,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// Samples per question (1, or 4 for self-consistency).
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        endpoint: EndpointArgs,
        #[command(flatten)]
        embedder: EmbedderArgs,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Recompute aggregates from a report's rows and print a summary.
    Summarize {
        /// Report directory containing rows.jsonl and summary.json.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Index { cmd } => run_index(cmd),
        Cmd::Gt { cmd } => run_gt(cmd),
        Cmd::Perturb { cmd } => run_perturb(cmd),
        Cmd::Eval { cmd } => run_eval(cmd),
        Cmd::Report { cmd } => run_report(cmd),
    }
}

fn run_index(cmd: IndexCmd) -> Result<()> {
    match cmd {
        IndexCmd::Build {
            kg,
            labels,
            out,
            batch_size,
            embedder,
        } => {
            let label_map = labels
                .map(|p| load_label_map(BufReader::new(File::open(p)?)))
                .transpose()?;
            let graph =
                load_triples_with_labels(BufReader::new(File::open(&kg)?), label_map.as_ref())?;
            let provider = embedder.provider()?;
            let index = build_index(&graph, provider.as_ref(), batch_size)?;
            let mut sink = BufWriter::new(File::create(&out)?);
            save_index(&index, &mut sink)?;
            sink.flush()?;
            println!(
                "indexed {} triples ({} entities, {} relations) at dimension {} [{}]",
                index.len(),
                graph.entity_count(),
                graph.relation_count(),
                index.dimension(),
                index.provider_tag()
            );
            Ok(())
        }
        IndexCmd::Inspect { index } => {
            let idx = load_index(&mut BufReader::new(File::open(&index)?))?;
            println!(
                "entries: {}\ndimension: {}\nprovider_tag: {}",
                idx.len(),
                idx.dimension(),
                idx.provider_tag()
            );
            for (t, _) in idx.entries().iter().take(5) {
                println!("  {t}");
            }
            Ok(())
        }
    }
}

fn run_gt(cmd: GtCmd) -> Result<()> {
    let GtCmd::Extract {
        dataset,
        max_hops,
        out,
    } = cmd;
    let load = load_dataset(&dataset)?;
    for line in &load.skipped {
        eprintln!("skipped: {line}");
    }
    let mut sink = BufWriter::new(File::create(&out)?);
    let mut total = 0usize;
    for q in &load.records {
        let paths = extract_paths(q, max_hops)?;
        total += paths.len();
        let record = serde_json::json!({
            "question_id": q.id,
            "paths": paths.iter().map(|p| &p.steps).collect::<Vec<_>>(),
        });
        serde_json::to_writer(&mut sink, &record)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    println!(
        "extracted {total} paths for {} questions into {}",
        load.records.len(),
        out.display()
    );
    Ok(())
}

fn run_perturb(cmd: PerturbCmd) -> Result<()> {
    let PerturbCmd::Build {
        dataset,
        kg,
        seed,
        out,
    } = cmd;
    let load = load_dataset(&dataset)?;
    for line in &load.skipped {
        eprintln!("skipped: {line}");
    }
    let graph = match kg {
        Some(path) => load_triples_with_labels(BufReader::new(File::open(path)?), None)?,
        None => {
            let mut g = cotcheck::kg::KnowledgeGraph::new();
            for q in &load.records {
                for t in q.subgraph.triples() {
                    g.insert(t.clone());
                }
            }
            g
        }
    };
    let set = build_discriminative_set(&load.records, &graph, seed, MixSpec::default())?;
    for line in &set.skipped {
        eprintln!("skipped: {line}");
    }
    let mut sink = BufWriter::new(File::create(&out)?);
    save_items(&set.items, &mut sink)?;
    sink.flush()?;
    let yes = set
        .items
        .iter()
        .filter(|i| matches!(i.label, cotcheck::perturb::Label::YES))
        .count();
    println!(
        "wrote {} items ({yes} YES / {} NO) to {}",
        set.items.len(),
        set.items.len() - yes,
        out.display()
    );
    Ok(())
}

fn run_eval(cmd: EvalCmd) -> Result<()> {
    match cmd {
        EvalCmd::Disc {
            dataset,
            mode,
            out,
            workers,
            endpoint,
        } => {
            let mut cfg = RunConfig::new(dataset, mode.parse()?, &out);
            cfg.generation = GenerationConfig::new(endpoint.model.clone());
            cfg.workers = workers;
            let client = endpoint.client()?;
            let report = harness::run_discriminative(&cfg, &client)?;
            println!(
                "{} items, accuracy {:.4} ({} unparseable); report in {}",
                report.summary.items,
                report.summary.overall_accuracy,
                report.summary.unparseable,
                out.display()
            );
            Ok(())
        }
        EvalCmd::Gen {
            dataset,
            kg,
            index,
            mode,
            sigma,
            top_k,
            samples,
            seed,
            out,
            workers,
            endpoint,
            embedder,
        } => {
            let mode: PromptMode = mode.parse()?;
            if mode.is_discriminative() {
                return Err(Error::Config(format!(
                    "mode {} is discriminative; use `eval disc`",
                    mode.name()
                )));
            }
            if samples != 1 && samples != 4 {
                return Err(Error::Config("--samples must be 1 or 4".into()));
            }
            let mut cfg = RunConfig::new(dataset, mode, &out);
            cfg.kg = kg;
            cfg.index = index;
            cfg.sigma = sigma;
            cfg.top_k = top_k;
            cfg.seed = seed;
            cfg.workers = workers;
            cfg.self_consistency = samples == 4;
            cfg.generation = GenerationConfig::new(endpoint.model.clone());
            cfg.generation.samples = samples;
            let provider = embedder.provider()?;
            let client = endpoint.client()?;
            let report = harness::run_generative(&cfg, &client, provider.as_ref())?;
            println!(
                "{} questions: answer F1 {:.4}, reasoning F1 {:.4}, gap {:.4}; report in {}",
                report.summary.questions,
                report.summary.answer.f1,
                report.summary.reasoning.f1,
                report.summary.gap,
                out.display()
            );
            Ok(())
        }
    }
}

fn run_report(cmd: ReportCmd) -> Result<()> {
    let ReportCmd::Summarize { dir } = cmd;
    if let Ok(report) = harness::report::read_gen_report(&dir) {
        let recomputed = harness::recompute_gen_aggregates(&report.rows, &report.summary);
        if recomputed != report.summary {
            return Err(Error::RunFailed(
                "stored aggregates do not match the rows".into(),
            ));
        }
        let s = &report.summary;
        println!("generative report: {} ({} mode)", s.model, s.mode);
        println!(
            "  questions {}  errored {}  FR {}  UR {}  A {}  U {}",
            s.questions,
            s.errored_questions,
            s.counts.fr,
            s.counts.ur,
            s.counts.abstained,
            s.counts.unstructured
        );
        println!(
            "  answer    P {:.4}  R {:.4}  F1 {:.4}{}",
            s.answer.precision,
            s.answer.recall,
            s.answer.f1,
            if s.answer.flagged { "  [flagged]" } else { "" }
        );
        println!(
            "  reasoning P {:.4}  R {:.4}  F1 {:.4}{}",
            s.reasoning.precision,
            s.reasoning.recall,
            s.reasoning.f1,
            if s.reasoning.flagged { "  [flagged]" } else { "" }
        );
        println!("  gap {:.4}", s.gap);
        if let Some(e) = s.mean_normalized_edit {
            println!("  mean normalized edit distance {e:.2}");
        }
        println!(
            "  errors: factual {}  coherence {}  answer {}",
            s.error_kinds.factual_error, s.error_kinds.coherence_error, s.error_kinds.answer_error
        );
        println!("aggregates verified against rows");
        return Ok(());
    }
    let report = harness::report::read_disc_report(&dir)?;
    let recomputed = harness::recompute_disc_aggregates(&report.rows, &report.summary);
    if recomputed != report.summary {
        return Err(Error::RunFailed(
            "stored aggregates do not match the rows".into(),
        ));
    }
    let s = &report.summary;
    println!("discriminative report: {} ({} mode)", s.model, s.mode);
    println!(
        "  items {}  unparseable {}  accuracy {:.4}",
        s.items, s.unparseable, s.overall_accuracy
    );
    for k in &s.per_kind {
        println!(
            "  {:?}: {} items, accuracy {:.4}{}",
            k.kind,
            k.total,
            k.accuracy,
            if k.flagged { "  [flagged]" } else { "" }
        );
    }
    println!("aggregates verified against rows");
    Ok(())
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
