//! A minimal in-process HTTP server speaking the chat-completion and
//! embedding wire protocols, for driving the HTTP clients in tests
//! without a network.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

#[derive(Debug, Clone)]
pub struct MockReply {
    pub status: u16,
    pub body: String,
}

impl MockReply {
    pub fn ok(body: impl Into<String>) -> Self {
        MockReply {
            status: 200,
            body: body.into(),
        }
    }

    /// A well-formed chat-completion response carrying these texts.
    pub fn chat(texts: &[&str]) -> Self {
        let choices: Vec<serde_json::Value> = texts
            .iter()
            .map(|t| serde_json::json!({"message": {"role": "assistant", "content": t}}))
            .collect();
        Self::ok(serde_json::json!({ "choices": choices }).to_string())
    }

    /// A well-formed embedding response carrying these vectors.
    pub fn embeddings(vectors: &[Vec<f32>]) -> Self {
        let data: Vec<serde_json::Value> = vectors
            .iter()
            .map(|v| serde_json::json!({"embedding": v}))
            .collect();
        Self::ok(serde_json::json!({ "data": data }).to_string())
    }
}

type Handler = dyn Fn(serde_json::Value) -> MockReply + Send + Sync;

/// One-request-at-a-time HTTP/1.1 server bound to a loopback port.
pub struct MockServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    hits: Arc<AtomicUsize>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Serve by calling `handler` with each request's JSON body.
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(serde_json::Value) -> MockReply + Send + Sync + 'static,
    {
        Self::spawn(Box::new(handler))
    }

    /// Serve a fixed script of replies in order (500 after exhaustion).
    pub fn start_script(replies: Vec<MockReply>) -> Self {
        let script = Mutex::new(replies.into_iter());
        Self::spawn(Box::new(move |_| {
            script
                .lock()
                .expect("script lock")
                .next()
                .unwrap_or(MockReply {
                    status: 500,
                    body: "script exhausted".into(),
                })
        }))
    }

    fn spawn(handler: Box<Handler>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let addr = listener.local_addr().expect("local addr");
        let shutdown = Arc::new(AtomicBool::new(false));
        let hits = Arc::new(AtomicUsize::new(0));
        let shutdown_inner = shutdown.clone();
        let hits_inner = hits.clone();
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if shutdown_inner.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                hits_inner.fetch_add(1, Ordering::SeqCst);
                let _ = serve_one(stream, &handler);
            }
        });
        MockServer {
            addr,
            shutdown,
            hits,
            handle: Some(handle),
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    /// Requests handled so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr); // unblock accept
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_one(mut stream: TcpStream, handler: &Handler) -> std::io::Result<()> {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end = loop {
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            return Ok(()); // shutdown poke or client hangup
        }
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = find_header_end(&buf) {
            break pos;
        }
        if buf.len() > 1 << 20 {
            return Ok(());
        }
    };
    let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
    let content_length = headers
        .lines()
        .find_map(|l| {
            let (name, value) = l.split_once(':')?;
            name.eq_ignore_ascii_case("content-length")
                .then(|| value.trim().parse::<usize>().ok())?
        })
        .unwrap_or(0);
    let body_start = header_end + 4;
    while buf.len() < body_start + content_length {
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            break;
        }
        buf.extend_from_slice(&chunk[..n]);
    }
    let body: serde_json::Value =
        serde_json::from_slice(&buf[body_start..body_start + content_length])
            .unwrap_or(serde_json::Value::Null);
    let reply = handler(body);
    let reason = match reply.status {
        200 => "OK",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Status",
    };
    let response = format!(
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        reason,
        reply.body.len(),
        reply.body
    );
    stream.write_all(response.as_bytes())?;
    stream.flush()
}

fn find_header_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{ChatEndpoint, GenerationConfig, HttpChatClient};

    #[test]
    fn chat_round_trip_over_the_wire() {
        let server = MockServer::start(|body| {
            // Echo back the requested sample count as distinct choices.
            let n = body["n"].as_u64().unwrap_or(1) as usize;
            assert_eq!(body["messages"][0]["role"], "user");
            assert!(body["messages"][0]["content"].as_str().unwrap().contains("hello"));
            let texts: Vec<String> = (0..n).map(|i| format!("choice {i}")).collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            MockReply::chat(&refs)
        });
        let client = HttpChatClient::new(server.url(), None);
        let mut cfg = GenerationConfig::new("mock-model");
        cfg.samples = 4;
        cfg.retry_initial_ms = 1;
        let out = client.chat("hello there", &cfg).unwrap();
        assert_eq!(out, vec!["choice 0", "choice 1", "choice 2", "choice 3"]);
    }

    #[test]
    fn rate_limited_request_retries_then_succeeds() {
        let server = MockServer::start_script(vec![
            MockReply {
                status: 429,
                body: "slow down".into(),
            },
            MockReply::chat(&["recovered"]),
        ]);
        let client = HttpChatClient::new(server.url(), None);
        let mut cfg = GenerationConfig::new("mock-model");
        cfg.retry_initial_ms = 1;
        let out = client.chat("p", &cfg).unwrap();
        assert_eq!(out, vec!["recovered"]);
        assert_eq!(server.hits(), 2);
    }

    #[test]
    fn client_error_status_is_fatal() {
        let server = MockServer::start_script(vec![MockReply {
            status: 404,
            body: "no such model".into(),
        }]);
        let client = HttpChatClient::new(server.url(), None);
        let mut cfg = GenerationConfig::new("mock-model");
        cfg.retry_initial_ms = 1;
        match client.chat("p", &cfg) {
            Err(crate::error::Error::Protocol { status, body }) => {
                assert_eq!(status, 404);
                assert!(body.contains("no such model"));
            }
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(server.hits(), 1);
    }

    #[test]
    fn exhausted_retries_surface_transport_error() {
        let server = MockServer::start_script(vec![
            MockReply { status: 500, body: "down".into() },
            MockReply { status: 500, body: "down".into() },
            MockReply { status: 500, body: "down".into() },
        ]);
        let client = HttpChatClient::new(server.url(), None);
        let mut cfg = GenerationConfig::new("mock-model");
        cfg.max_retries = 2;
        cfg.retry_initial_ms = 1;
        match client.chat("p", &cfg) {
            Err(crate::error::Error::Transport { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn embedding_client_round_trip() {
        use crate::embed::{EmbeddingProvider, HttpEmbeddingProvider};
        let server = MockServer::start(|body| {
            let texts = body["input"].as_array().expect("input array").len();
            let vectors: Vec<Vec<f32>> = (0..texts).map(|i| vec![i as f32 + 1.0, 0.0]).collect();
            MockReply::embeddings(&vectors)
        });
        let provider = HttpEmbeddingProvider::new(server.url(), "mock-embed", None, 2);
        let out = provider
            .embed(&["one".to_string(), "two".to_string()])
            .unwrap();
        assert_eq!(out.len(), 2);
        // Vectors come back L2-normalized.
        assert!((out[0].norm() - 1.0).abs() < 1e-6);
    }
}
