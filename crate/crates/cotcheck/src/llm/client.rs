//! Chat-completion endpoints: the HTTP client with retry, and an
//! in-process scripted endpoint for tests and offline fixtures.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling and transport settings for one evaluation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    /// Completions per request; 4 under self-consistency.
    pub samples: usize,
    pub max_tokens: usize,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default = "default_backoff_ms")]
    pub retry_initial_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_retries() -> usize {
    3
}

fn default_backoff_ms() -> u64 {
    250
}

fn default_timeout_secs() -> u64 {
    60
}

impl GenerationConfig {
    pub fn new(model: impl Into<String>) -> Self {
        GenerationConfig {
            model: model.into(),
            temperature: 0.7,
            top_p: 0.9,
            samples: 1,
            max_tokens: 512,
            max_retries: default_retries(),
            retry_initial_ms: default_backoff_ms(),
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperature < 0.0 {
            return Err(Error::Config("temperature must be >= 0".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Config("top_p must be in (0, 1]".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Anything that can turn a prompt into `samples` completions.
pub trait ChatEndpoint: Send + Sync {
    fn chat(&self, prompt: &str, cfg: &GenerationConfig) -> Result<Vec<String>>;
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    top_p: f64,
    n: usize,
    max_tokens: usize,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

/// Client for an OpenAI-style chat completions endpoint. The whole prompt
/// travels as a single user message. Transient failures (transport, 429,
/// 5xx) retry with exponential backoff up to the configured budget.
pub struct HttpChatClient {
    url: String,
    api_key: Option<String>,
}

impl HttpChatClient {
    pub fn new(url: impl Into<String>, api_key: Option<String>) -> Self {
        HttpChatClient {
            url: url.into(),
            api_key,
        }
    }

    /// Reads the API key from `COTCHECK_API_KEY` when present.
    pub fn from_env(url: impl Into<String>) -> Self {
        Self::new(url, std::env::var("COTCHECK_API_KEY").ok())
    }

    fn attempt(&self, agent: &ureq::Agent, body: &ChatRequest<'_>) -> std::result::Result<Vec<String>, AttemptError> {
        let mut req = agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| AttemptError::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(AttemptError::Retryable(format!("status {status}")));
        }
        if status >= 300 {
            let excerpt: String = resp
                .body_mut()
                .read_to_string()
                .unwrap_or_default()
                .chars()
                .take(300)
                .collect();
            return Err(AttemptError::Fatal(Error::Protocol {
                status,
                body: excerpt,
            }));
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| AttemptError::Fatal(Error::Protocol {
                status,
                body: format!("unparseable chat response: {e}"),
            }))?;
        Ok(parsed
            .choices
            .into_iter()
            .map(|c| c.message.content)
            .collect())
    }
}

enum AttemptError {
    Retryable(String),
    Fatal(Error),
}

impl ChatEndpoint for HttpChatClient {
    fn chat(&self, prompt: &str, cfg: &GenerationConfig) -> Result<Vec<String>> {
        cfg.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .build()
            .into();
        let body = ChatRequest {
            model: &cfg.model,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: cfg.temperature,
            top_p: cfg.top_p,
            n: cfg.samples,
            max_tokens: cfg.max_tokens,
        };
        let mut last_msg = String::new();
        for attempt in 0..=cfg.max_retries {
            match self.attempt(&agent, &body) {
                Ok(texts) => {
                    if texts.len() != cfg.samples {
                        return Err(Error::Protocol {
                            status: 200,
                            body: format!(
                                "expected {} completions, got {}",
                                cfg.samples,
                                texts.len()
                            ),
                        });
                    }
                    return Ok(texts);
                }
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(msg)) => {
                    last_msg = msg;
                    if attempt < cfg.max_retries {
                        let delay = cfg.retry_initial_ms.saturating_mul(1 << attempt.min(8));
                        std::thread::sleep(Duration::from_millis(delay));
                    }
                }
            }
        }
        Err(Error::Transport {
            attempts: cfg.max_retries + 1,
            msg: last_msg,
        })
    }
}

type Responder = dyn Fn(&str, &GenerationConfig) -> Result<Vec<String>> + Send + Sync;

/// In-process endpoint driven by a closure; used by tests and the offline
/// examples to script model behavior.
pub struct ScriptedEndpoint {
    responder: Box<Responder>,
}

impl ScriptedEndpoint {
    pub fn new<F>(responder: F) -> Self
    where
        F: Fn(&str, &GenerationConfig) -> Result<Vec<String>> + Send + Sync + 'static,
    {
        ScriptedEndpoint {
            responder: Box::new(responder),
        }
    }

    /// Script that replies with a constant text, replicated per sample.
    pub fn constant(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::new(move |_, cfg| Ok(vec![text.clone(); cfg.samples]))
    }
}

impl ChatEndpoint for ScriptedEndpoint {
    fn chat(&self, prompt: &str, cfg: &GenerationConfig) -> Result<Vec<String>> {
        cfg.validate()?;
        (self.responder)(prompt, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_match_the_evaluation_setup() {
        let cfg = GenerationConfig::new("test-model");
        assert_eq!(cfg.temperature, 0.7);
        assert_eq!(cfg.top_p, 0.9);
        assert_eq!(cfg.samples, 1);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_rejects_bad_values() {
        let mut cfg = GenerationConfig::new("m");
        cfg.top_p = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = GenerationConfig::new("m");
        cfg.samples = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = GenerationConfig::new("m");
        cfg.temperature = -0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn scripted_endpoint_returns_samples_in_order() {
        let ep = ScriptedEndpoint::new(|_, cfg| {
            Ok((0..cfg.samples).map(|i| format!("sample {i}")).collect())
        });
        let mut cfg = GenerationConfig::new("m");
        cfg.samples = 4;
        let out = ep.chat("prompt", &cfg).unwrap();
        assert_eq!(out, vec!["sample 0", "sample 1", "sample 2", "sample 3"]);
    }

    #[test]
    fn constant_script_replicates_per_sample() {
        let ep = ScriptedEndpoint::constant("YES");
        let cfg = GenerationConfig::new("m");
        assert_eq!(ep.chat("p", &cfg).unwrap(), vec!["YES"]);
    }
}
