//! Request types and their canonical serialization.
//!
//! Every request that can be recorded to a cassette has exactly one
//! canonical byte form; the replay digest is the SHA-256 of those bytes.
//! Canonicalization sorts keys, uses LF line endings, trims trailing
//! whitespace from text fields, and renders temperatures with a fixed
//! 6-decimal precision so that float formatting can never shift a digest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Message author role in a chat completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

/// One chat message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Role::Assistant, content: content.into() }
    }
}

/// A text-completion request.
///
/// Invariants: `messages` is non-empty and the first message's role is
/// system or user. [`CompletionRequest::new`] enforces both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    /// Provider model override; `None` uses the provider's configured model.
    pub model: Option<String>,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop_sequences: Vec<String>,
}

impl CompletionRequest {
    pub fn new(messages: Vec<Message>) -> Result<Self, InvalidRequest> {
        let first = messages.first().ok_or(InvalidRequest::EmptyMessages)?;
        if first.role == Role::Assistant {
            return Err(InvalidRequest::BadLeadingRole);
        }
        Ok(CompletionRequest {
            model: None,
            messages,
            temperature: 0.0,
            max_tokens: 1024,
            stop_sequences: Vec::new(),
        })
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn with_max_tokens(mut self, n: u32) -> Self {
        self.max_tokens = n;
        self
    }

    pub fn with_stop(mut self, stops: Vec<String>) -> Self {
        self.stop_sequences = stops;
        self
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = Some(model.into());
        self
    }

    /// Canonical byte form used for digests.
    pub fn canonical(&self) -> String {
        // serde_json's default map is a BTreeMap, so object keys come out
        // sorted; strings carry no line endings of their own.
        let messages: Vec<serde_json::Value> = self
            .messages
            .iter()
            .map(|m| {
                serde_json::json!({
                    "content": m.content.trim_end(),
                    "role": m.role.as_str(),
                })
            })
            .collect();
        let stops: Vec<&str> = self.stop_sequences.iter().map(|s| s.as_str()).collect();
        let value = serde_json::json!({
            "kind": "completion",
            "max_tokens": self.max_tokens,
            "messages": messages,
            "model": self.model.as_deref().unwrap_or(""),
            "stop": stops,
            "temperature": format!("{:.6}", self.temperature),
        });
        value.to_string()
    }

    pub fn digest(&self) -> String {
        digest_bytes(self.canonical().as_bytes())
    }
}

/// Structural errors in a [`CompletionRequest`].
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum InvalidRequest {
    #[error("completion request has no messages")]
    EmptyMessages,
    #[error("first message role must be system or user")]
    BadLeadingRole,
}

/// An embedding produced by one provider model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub model_id: String,
}

impl EmbeddingVector {
    /// Cosine similarity; zero-norm inputs score 0 rather than NaN.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        cosine(&self.values, &other.values)
    }
}

/// Cosine similarity over raw slices; zero-norm inputs score 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || a.len() != b.len() {
        return 0.0;
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Canonical form of an embedding request.
pub fn embedding_canonical(model: &str, texts: &[String]) -> String {
    let inputs: Vec<&str> = texts.iter().map(|t| t.trim_end()).collect();
    serde_json::json!({
        "input": inputs,
        "kind": "embedding",
        "model": model,
    })
    .to_string()
}

pub fn embedding_digest(model: &str, texts: &[String]) -> String {
    digest_bytes(embedding_canonical(model, texts).as_bytes())
}

/// HTTP method for raw requests routed through the gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HttpMethod {
    Get,
    Post,
}

impl HttpMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            HttpMethod::Get => "GET",
            HttpMethod::Post => "POST",
        }
    }
}

/// A raw HTTP request spec.
///
/// Headers and `auth_query` carry credentials and are excluded from the
/// canonical form, so cassettes never depend on secrets.
#[derive(Debug, Clone)]
pub struct HttpRequestSpec {
    pub method: HttpMethod,
    pub url: String,
    pub body: Option<String>,
    pub headers: Vec<(String, String)>,
    /// Query parameter appended at send time only (e.g. an API key).
    pub auth_query: Option<(String, String)>,
}

impl HttpRequestSpec {
    pub fn get(url: impl Into<String>) -> Self {
        HttpRequestSpec {
            method: HttpMethod::Get,
            url: url.into(),
            body: None,
            headers: Vec::new(),
            auth_query: None,
        }
    }

    pub fn post(url: impl Into<String>, body: impl Into<String>) -> Self {
        HttpRequestSpec {
            method: HttpMethod::Post,
            url: url.into(),
            body: Some(body.into()),
            headers: Vec::new(),
            auth_query: None,
        }
    }

    pub fn with_header(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }

    pub fn with_auth_query(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.auth_query = Some((name.into(), value.into()));
        self
    }

    pub fn canonical(&self) -> String {
        serde_json::json!({
            "body": self.body.as_deref().map(|b| b.trim_end()).unwrap_or(""),
            "kind": "http",
            "method": self.method.as_str(),
            "url": self.url.trim_end(),
        })
        .to_string()
    }

    pub fn digest(&self) -> String {
        digest_bytes(self.canonical().as_bytes())
    }
}

/// An HTTP response as seen by the pipeline: status plus body bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn ok(body: impl Into<Vec<u8>>) -> Self {
        HttpResponse { status: 200, body: body.into() }
    }

    pub fn body_text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    /// Cassette envelope: `HTTP <status>\n` followed by the raw body.
    pub fn to_cassette_bytes(&self) -> Vec<u8> {
        let mut out = format!("HTTP {}\n", self.status).into_bytes();
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_cassette_bytes(bytes: &[u8]) -> Option<Self> {
        let nl = bytes.iter().position(|&b| b == b'\n')?;
        let head = std::str::from_utf8(&bytes[..nl]).ok()?;
        let status: u16 = head.strip_prefix("HTTP ")?.trim().parse().ok()?;
        Some(HttpResponse { status, body: bytes[nl + 1..].to_vec() })
    }
}

pub(crate) fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{:02x}", b));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_requires_messages() {
        assert_eq!(CompletionRequest::new(vec![]).unwrap_err(), InvalidRequest::EmptyMessages);
        let err = CompletionRequest::new(vec![Message::assistant("x")]).unwrap_err();
        assert_eq!(err, InvalidRequest::BadLeadingRole);
    }

    #[test]
    fn digest_ignores_trailing_whitespace() {
        let a = CompletionRequest::new(vec![Message::user("hello")]).unwrap();
        let b = CompletionRequest::new(vec![Message::user("hello  \n")]).unwrap();
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn digest_depends_on_temperature_rendering() {
        let base = CompletionRequest::new(vec![Message::user("q")]).unwrap();
        let warm = base.clone().with_temperature(0.7);
        assert_ne!(base.digest(), warm.digest());
        // Same value renders identically regardless of how it was produced.
        let warm2 = base.with_temperature(0.7000000000000001_f64);
        assert_eq!(warm.digest(), warm2.digest());
    }

    #[test]
    fn cosine_handles_degenerate_inputs() {
        assert_eq!(cosine(&[], &[]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn http_cassette_envelope_round_trips() {
        let resp = HttpResponse { status: 404, body: b"not found\nbody".to_vec() };
        let bytes = resp.to_cassette_bytes();
        assert_eq!(HttpResponse::from_cassette_bytes(&bytes).unwrap(), resp);
    }
}
