//! Knowledge-graph-grounded verification of chain-of-thought reasoning.
//!
//! The pipeline: load a KG ([`kg`]), embed and index its triples
//! ([`embed`], [`index`]), parse model responses into steps ([`parser`]),
//! ground each step to its best triple ([`retrieval`]), judge the grounded
//! path and align it against ground truth ([`eval`], [`ground_truth`]),
//! and aggregate precision/recall/F1 reports over a whole dataset
//! ([`harness`]). [`perturb`] builds labeled valid/invalid path sets for
//! discriminative probes, and [`llm`] renders the prompt templates and
//! drives a chat endpoint with record/replay.
//!
//! Each major capability has a runnable demo under `examples/`.

pub mod embed;
pub mod error;
pub mod eval;
pub mod ground_truth;
pub mod harness;
pub mod index;
pub mod kg;
pub mod llm;
pub mod oracles;
pub mod parser;
pub mod perturb;
pub mod retrieval;

pub use error::{Error, Result};
