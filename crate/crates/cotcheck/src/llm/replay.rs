//! Record/replay store for chat completions.
//!
//! Every live request/response pair can be persisted under a key derived
//! from the prompt and sampling settings, so a finished evaluation run
//! replays bit-for-bit without touching the network.

use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::client::{ChatEndpoint, GenerationConfig};

#[derive(Serialize)]
struct KeyMaterial<'a> {
    prompt: &'a str,
    model: &'a str,
    temperature: f64,
    top_p: f64,
    n: usize,
    max_tokens: usize,
}

#[derive(Serialize, Deserialize)]
struct StoredExchange {
    prompt: String,
    model: String,
    temperature: f64,
    top_p: f64,
    n: usize,
    max_tokens: usize,
    responses: Vec<String>,
}

/// Content-addressed response store: one JSON file per distinct request.
pub struct ReplayStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ReplayStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ReplayStore {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn key(prompt: &str, cfg: &GenerationConfig) -> String {
        let material = KeyMaterial {
            prompt,
            model: &cfg.model,
            temperature: cfg.temperature,
            top_p: cfg.top_p,
            n: cfg.samples,
            max_tokens: cfg.max_tokens,
        };
        let bytes = serde_json::to_vec(&material).expect("key material serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(digest)
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn lookup(&self, prompt: &str, cfg: &GenerationConfig) -> Result<Option<Vec<String>>> {
        let path = self.path_for(&Self::key(prompt, cfg));
        if !path.exists() {
            return Ok(None);
        }
        let data = fs::read_to_string(&path)?;
        let stored: StoredExchange = serde_json::from_str(&data)?;
        Ok(Some(stored.responses))
    }

    pub fn record(
        &self,
        prompt: &str,
        cfg: &GenerationConfig,
        responses: &[String],
    ) -> Result<()> {
        let _guard = self.write_lock.lock().expect("replay store lock");
        let stored = StoredExchange {
            prompt: prompt.to_string(),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            top_p: cfg.top_p,
            n: cfg.samples,
            max_tokens: cfg.max_tokens,
            responses: responses.to_vec(),
        };
        let path = self.path_for(&Self::key(prompt, cfg));
        fs::write(path, serde_json::to_vec_pretty(&stored)?)?;
        Ok(())
    }
}

/// The completion driver the pipelines use: a live endpoint, a recording
/// endpoint, or pure replay.
pub enum ChatClient {
    Live(Box<dyn ChatEndpoint>),
    Record(Box<dyn ChatEndpoint>, ReplayStore),
    Replay(ReplayStore),
}

impl ChatClient {
    /// Obtain `cfg.samples` completions for a prompt. Record mode checks
    /// the store first, so resumed runs never repeat paid requests.
    pub fn complete(&self, prompt: &str, cfg: &GenerationConfig) -> Result<Vec<String>> {
        cfg.validate()?;
        match self {
            ChatClient::Live(endpoint) => endpoint.chat(prompt, cfg),
            ChatClient::Record(endpoint, store) => {
                if let Some(responses) = store.lookup(prompt, cfg)? {
                    return Ok(responses);
                }
                let responses = endpoint.chat(prompt, cfg)?;
                store.record(prompt, cfg, &responses)?;
                Ok(responses)
            }
            ChatClient::Replay(store) => store
                .lookup(prompt, cfg)?
                .ok_or_else(|| Error::ReplayMiss {
                    key: ReplayStore::key(prompt, cfg),
                }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedEndpoint;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenerationConfig::new("m");
        let calls = Arc::new(AtomicUsize::new(0));
        let calls_inner = calls.clone();
        let endpoint = ScriptedEndpoint::new(move |_, _| {
            calls_inner.fetch_add(1, Ordering::SeqCst);
            Ok(vec!["scripted".to_string()])
        });
        let client = ChatClient::Record(
            Box::new(endpoint),
            ReplayStore::open(dir.path()).unwrap(),
        );
        assert_eq!(client.complete("p", &cfg).unwrap(), vec!["scripted"]);
        assert_eq!(client.complete("p", &cfg).unwrap(), vec!["scripted"]);
        assert_eq!(calls.load(Ordering::SeqCst), 1, "second call must replay");

        let replay = ChatClient::Replay(ReplayStore::open(dir.path()).unwrap());
        assert_eq!(replay.complete("p", &cfg).unwrap(), vec!["scripted"]);
    }

    #[test]
    fn replay_miss_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let client = ChatClient::Replay(ReplayStore::open(dir.path()).unwrap());
        let cfg = GenerationConfig::new("m");
        assert!(matches!(
            client.complete("unseen", &cfg),
            Err(Error::ReplayMiss { .. })
        ));
    }

    #[test]
    fn key_depends_on_prompt_and_sampling() {
        let cfg = GenerationConfig::new("m");
        let mut cfg4 = cfg.clone();
        cfg4.samples = 4;
        assert_ne!(ReplayStore::key("a", &cfg), ReplayStore::key("b", &cfg));
        assert_ne!(ReplayStore::key("a", &cfg), ReplayStore::key("a", &cfg4));
        assert_eq!(ReplayStore::key("a", &cfg), ReplayStore::key("a", &cfg));
    }
}
