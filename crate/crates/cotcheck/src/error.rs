//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("entity not found in subgraph: {0}")]
    MissingEntity(String),

    #[error("no candidate available: {0}")]
    NoCandidate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("embedding provider failed at batch offset {offset}: {msg}")]
    Provider { offset: usize, msg: String },

    #[error("index format error: {0}")]
    Format(String),

    #[error("path construction failed at step {step}: {msg}")]
    Construction { step: usize, msg: String },

    #[error("empty reasoning path")]
    EmptyPath,

    #[error("no ground-truth paths supplied")]
    NoGroundTruth,

    #[error("perturbation failed: {0}")]
    Generation(String),

    #[error("path has fewer than two steps; nothing to shuffle")]
    NotShufflable,

    #[error("prompt template missing required slot: {0}")]
    Template(String),

    #[error("transport error after {attempts} attempts: {msg}")]
    Transport { attempts: usize, msg: String },

    #[error("endpoint returned status {status}: {body}")]
    Protocol { status: u16, body: String },

    #[error("replay store miss for request {key}")]
    ReplayMiss { key: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("run failed: {0}")]
    RunFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
