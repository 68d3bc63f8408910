//! Embedding vectors and providers.
//!
//! The embedding model itself lives behind [`EmbeddingProvider`]. Two
//! implementations ship here: a deterministic character-trigram hashing
//! embedder for fully offline runs, and an HTTP client for a remote
//! embedding endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-length vector. Stored vectors are L2-normalized (or exactly
/// zero for degenerate input such as text with no trigrams).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Self {
        EmbeddingVector { values }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| v as f64 * v as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Scale to unit length; zero vectors are left untouched.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for v in &mut self.values {
                *v = (*v as f64 / n) as f32;
            }
        }
        self
    }
}

/// Cosine similarity; 0.0 when either vector has zero norm.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::Dimension {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    let mut dot = 0f64;
    for (&x, &y) in a.values.iter().zip(&b.values) {
        dot += x as f64 * y as f64;
    }
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Contract for any embedding backend. Implementations must be
/// deterministic per `(tag, text)` and return one vector per input text.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>>;
    fn dimension(&self) -> usize;
    fn tag(&self) -> &str;

    fn embed_one(&self, text: &str) -> Result<EmbeddingVector> {
        let mut out = self.embed(std::slice::from_ref(&text.to_string()))?;
        out.pop()
            .ok_or_else(|| Error::Provider {
                offset: 0,
                msg: "provider returned no vector".into(),
            })
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed.wrapping_mul(FNV_PRIME);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic offline embedder: every character trigram of the
/// lower-cased text is hashed to a bucket with a ±1 sign, summed, and the
/// result L2-normalized. Texts shorter than three characters embed to the
/// zero vector.
#[derive(Debug, Clone)]
pub struct TrigramEmbedder {
    dimension: usize,
    seed: u64,
    tag: String,
}

impl TrigramEmbedder {
    pub const DEFAULT_DIMENSION: usize = 256;

    pub fn new() -> Self {
        Self::with_seed(0x5eed)
    }

    pub fn with_seed(seed: u64) -> Self {
        TrigramEmbedder {
            dimension: Self::DEFAULT_DIMENSION,
            seed,
            tag: format!("trigram-{}-{seed:x}", Self::DEFAULT_DIMENSION),
        }
    }
}

impl Default for TrigramEmbedder {
    fn default() -> Self {
        Self::new()
    }
}

impl EmbeddingProvider for TrigramEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        Ok(texts
            .iter()
            .map(|text| {
                let lower = text.to_lowercase();
                let chars: Vec<char> = lower.chars().collect();
                let mut acc = vec![0f32; self.dimension];
                let mut buf = [0u8; 12];
                for window in chars.windows(3) {
                    let mut len = 0;
                    for c in window {
                        len += c.encode_utf8(&mut buf[len..]).len();
                    }
                    let h = fnv1a(self.seed, &buf[..len]);
                    let bucket = (h % self.dimension as u64) as usize;
                    let sign = if (h >> 32) & 1 == 0 { 1.0 } else { -1.0 };
                    acc[bucket] += sign;
                }
                EmbeddingVector::new(acc).normalized()
            })
            .collect())
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> &str {
        &self.tag
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    input: &'a [String],
    model: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    embedding: Vec<f32>,
}

/// Remote embedding endpoint speaking
/// `POST {"input": [...], "model": ...} -> {"data": [{"embedding": [...]}]}`.
/// The endpoint URL and optional bearer key come from configuration; the
/// expected dimension is declared up front and enforced on every response.
pub struct HttpEmbeddingProvider {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    dimension: usize,
    tag: String,
}

impl HttpEmbeddingProvider {
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        api_key: Option<String>,
        dimension: usize,
    ) -> Self {
        let model = model.into();
        HttpEmbeddingProvider {
            endpoint: endpoint.into(),
            tag: format!("http:{model}:{dimension}"),
            model,
            api_key,
            dimension,
        }
    }

    /// Reads the API key from `COTCHECK_API_KEY` when present.
    pub fn from_env(endpoint: impl Into<String>, model: impl Into<String>, dimension: usize) -> Self {
        Self::new(
            endpoint,
            model,
            std::env::var("COTCHECK_API_KEY").ok(),
            dimension,
        )
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let body = EmbedRequest {
            input: texts,
            model: &self.model,
        };
        let mut req = ureq::post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| Error::Provider {
            offset: 0,
            msg: e.to_string(),
        })?;
        if resp.status().as_u16() >= 300 {
            return Err(Error::Protocol {
                status: resp.status().as_u16(),
                body: resp
                    .body_mut()
                    .read_to_string()
                    .unwrap_or_default()
                    .chars()
                    .take(200)
                    .collect(),
            });
        }
        let parsed: EmbedResponse = resp.body_mut().read_json().map_err(|e| Error::Provider {
            offset: 0,
            msg: format!("bad embedding response: {e}"),
        })?;
        if parsed.data.len() != texts.len() {
            return Err(Error::Provider {
                offset: 0,
                msg: format!(
                    "expected {} embeddings, got {}",
                    texts.len(),
                    parsed.data.len()
                ),
            });
        }
        parsed
            .data
            .into_iter()
            .map(|d| {
                if d.embedding.len() != self.dimension {
                    return Err(Error::Dimension {
                        expected: self.dimension,
                        got: d.embedding.len(),
                    });
                }
                Ok(EmbeddingVector::new(d.embedding).normalized())
            })
            .collect()
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> &str {
        &self.tag
    }
}
