//! Uniform access to completion, embedding, and raw-HTTP providers,
//! with record/replay cassettes for deterministic offline runs.
//!
//! The [`Gateway`] sits between every network-touching call in the crate
//! and its backend. In `Record` mode each response is appended to a
//! cassette keyed by a canonical request digest; in `Replay` mode requests
//! are answered from the cassette alone and no backend is ever contacted.
//! With a fixed cassette, any sequence of calls yields byte-identical
//! outputs across runs.

pub mod cassette;
pub mod mock;
pub mod providers;
pub mod request;

use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use cassette::{Cassette, CassetteEntry, RecordKind, Recorder, ReplayStore};
pub use mock::{MockEmbeddings, MockHttp, MockLlm, MockRule};
pub use providers::{
    CompletionProvider, EmbeddingProvider, HttpBackend, LiveCompletionProvider,
    LiveEmbeddingProvider, LiveHttpBackend, ProviderConfig,
};
pub use request::{
    cosine, CompletionRequest, EmbeddingVector, HttpMethod, HttpRequestSpec, HttpResponse,
    InvalidRequest, Message, Role,
};

/// Errors surfaced by the gateway layer.
#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("provider error: {0}")]
    Provider(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("http status {0}")]
    HttpStatus(u16),
    #[error("request timed out")]
    Timeout,
    #[error("missing API key: environment variable {0} is not set")]
    MissingKey(String),
    #[error("cassette miss for {kind} digest {digest} (fixture drift?)")]
    CassetteMiss { kind: &'static str, digest: String },
    #[error("no {0} provider configured")]
    NoProvider(&'static str),
    #[error("cassette io error at {path}: {source}")]
    CassetteIo { path: PathBuf, source: std::io::Error },
    #[error("malformed cassette record at {path}:{line}")]
    CassetteFormat { path: PathBuf, line: usize },
}

impl GatewayError {
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            GatewayError::Transport(_)
                | GatewayError::Timeout
                | GatewayError::HttpStatus(429)
                | GatewayError::HttpStatus(500..=599)
        )
    }

    pub fn is_cassette_miss(&self) -> bool {
        matches!(self, GatewayError::CassetteMiss { .. })
    }
}

enum Mode {
    /// Backends answer directly; nothing is written.
    Off,
    /// Backends answer; every response is appended to the cassette file.
    Record(Recorder),
    /// The cassette answers; backends are never contacted.
    Replay(ReplayStore),
}

/// Shared entry point for all provider traffic.
pub struct Gateway {
    completion: Option<Arc<dyn CompletionProvider>>,
    embeddings: Option<Arc<dyn EmbeddingProvider>>,
    http: Option<Arc<dyn HttpBackend>>,
    /// Model id baked into embedding digests. Kept on the gateway so
    /// replay-only gateways can compute the same digests without a live
    /// provider.
    embedding_model: String,
    mode: Mode,
}

impl Gateway {
    pub fn builder() -> GatewayBuilder {
        GatewayBuilder::default()
    }

    /// A replay-only gateway: answers exclusively from the cassette.
    pub fn replay(path: &Path) -> Result<Self, GatewayError> {
        let cassette = Cassette::load(path)?;
        Ok(Gateway {
            completion: None,
            embeddings: None,
            http: None,
            embedding_model: String::new(),
            mode: Mode::Replay(ReplayStore::from_cassette(cassette)),
        })
    }

    pub fn is_replay(&self) -> bool {
        matches!(self.mode, Mode::Replay(_))
    }

    /// Completion text for `req`, via cassette or provider per mode.
    pub fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        let digest = req.digest();
        match &self.mode {
            Mode::Replay(store) => store
                .take(RecordKind::Completion, &digest)
                .map(|b| String::from_utf8_lossy(&b).into_owned())
                .ok_or(GatewayError::CassetteMiss { kind: "completion", digest }),
            Mode::Off => self.completion_provider()?.complete(req),
            Mode::Record(recorder) => {
                let text = self.completion_provider()?.complete(req)?;
                recorder.append(RecordKind::Completion, &digest, text.as_bytes())?;
                Ok(text)
            }
        }
    }

    /// One vector per input text, order-preserving.
    pub fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, GatewayError> {
        if texts.is_empty() {
            return Err(GatewayError::Provider("embed called with no texts".into()));
        }
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(GatewayError::Provider("embed called with an empty text".into()));
        }
        let digest = request::embedding_digest(&self.embedding_model, texts);
        match &self.mode {
            Mode::Replay(store) => {
                let body = store
                    .take(RecordKind::Embedding, &digest)
                    .ok_or(GatewayError::CassetteMiss { kind: "embedding", digest })?;
                decode_embedding_body(&body)
            }
            Mode::Off => {
                validate_vectors(self.embedding_provider()?.embed(texts)?, texts.len())
            }
            Mode::Record(recorder) => {
                let vectors =
                    validate_vectors(self.embedding_provider()?.embed(texts)?, texts.len())?;
                recorder.append(RecordKind::Embedding, &digest, &encode_embedding_body(&vectors))?;
                Ok(vectors)
            }
        }
    }

    /// Raw HTTP exchange, via cassette or backend per mode.
    pub fn http(&self, req: &HttpRequestSpec) -> Result<HttpResponse, GatewayError> {
        let digest = req.digest();
        match &self.mode {
            Mode::Replay(store) => {
                let body = store
                    .take(RecordKind::Http, &digest)
                    .ok_or(GatewayError::CassetteMiss { kind: "http", digest })?;
                HttpResponse::from_cassette_bytes(&body).ok_or_else(|| GatewayError::Provider(
                    "corrupt http cassette envelope".into(),
                ))
            }
            Mode::Off => self.http_backend()?.execute(req),
            Mode::Record(recorder) => {
                let resp = self.http_backend()?.execute(req)?;
                recorder.append(RecordKind::Http, &digest, &resp.to_cassette_bytes())?;
                Ok(resp)
            }
        }
    }

    pub fn has_completion_provider(&self) -> bool {
        self.completion.is_some()
    }

    pub fn has_embedding_provider(&self) -> bool {
        self.embeddings.is_some()
    }

    fn completion_provider(&self) -> Result<&Arc<dyn CompletionProvider>, GatewayError> {
        self.completion.as_ref().ok_or(GatewayError::NoProvider("completion"))
    }

    fn embedding_provider(&self) -> Result<&Arc<dyn EmbeddingProvider>, GatewayError> {
        self.embeddings.as_ref().ok_or(GatewayError::NoProvider("embedding"))
    }

    fn http_backend(&self) -> Result<&Arc<dyn HttpBackend>, GatewayError> {
        self.http.as_ref().ok_or(GatewayError::NoProvider("http"))
    }
}

/// One vector per text, all the same positive dimension, finite entries.
fn validate_vectors(
    vectors: Vec<EmbeddingVector>,
    expected: usize,
) -> Result<Vec<EmbeddingVector>, GatewayError> {
    if vectors.len() != expected {
        return Err(GatewayError::Provider(format!(
            "embedding count mismatch: expected {expected}, got {}",
            vectors.len()
        )));
    }
    let dim = vectors.first().map(|v| v.values.len()).unwrap_or(0);
    for v in &vectors {
        if v.values.is_empty() || v.values.len() != dim {
            return Err(GatewayError::Provider("inconsistent embedding dimensions".into()));
        }
        if v.values.iter().any(|x| !x.is_finite()) {
            return Err(GatewayError::Provider("non-finite embedding entry".into()));
        }
    }
    Ok(vectors)
}

fn encode_embedding_body(vectors: &[EmbeddingVector]) -> Vec<u8> {
    let model = vectors.first().map(|v| v.model_id.clone()).unwrap_or_default();
    let values: Vec<&Vec<f64>> = vectors.iter().map(|v| &v.values).collect();
    serde_json::json!({"model": model, "vectors": values}).to_string().into_bytes()
}

fn decode_embedding_body(body: &[u8]) -> Result<Vec<EmbeddingVector>, GatewayError> {
    #[derive(serde::Deserialize)]
    struct Stored {
        model: String,
        vectors: Vec<Vec<f64>>,
    }
    let stored: Stored = serde_json::from_slice(body)
        .map_err(|e| GatewayError::Provider(format!("corrupt embedding cassette record: {e}")))?;
    Ok(stored
        .vectors
        .into_iter()
        .map(|values| EmbeddingVector { values, model_id: stored.model.clone() })
        .collect())
}

/// Builds a [`Gateway`] from providers and a cassette mode.
#[derive(Default)]
pub struct GatewayBuilder {
    completion: Option<Arc<dyn CompletionProvider>>,
    embeddings: Option<Arc<dyn EmbeddingProvider>>,
    http: Option<Arc<dyn HttpBackend>>,
    embedding_model: Option<String>,
    record_path: Option<PathBuf>,
    replay_path: Option<PathBuf>,
}

impl GatewayBuilder {
    pub fn completion(mut self, provider: Arc<dyn CompletionProvider>) -> Self {
        self.completion = Some(provider);
        self
    }

    pub fn embeddings(mut self, provider: Arc<dyn EmbeddingProvider>) -> Self {
        if self.embedding_model.is_none() {
            self.embedding_model = Some(provider.model_id().to_string());
        }
        self.embeddings = Some(provider);
        self
    }

    /// Pins the model id used for embedding digests; needed for replay
    /// without a live embedding provider.
    pub fn embedding_model(mut self, model: impl Into<String>) -> Self {
        self.embedding_model = Some(model.into());
        self
    }

    pub fn http(mut self, backend: Arc<dyn HttpBackend>) -> Self {
        self.http = Some(backend);
        self
    }

    pub fn record_to(mut self, path: impl Into<PathBuf>) -> Self {
        self.record_path = Some(path.into());
        self
    }

    pub fn replay_from(mut self, path: impl Into<PathBuf>) -> Self {
        self.replay_path = Some(path.into());
        self
    }

    pub fn build(self) -> Result<Gateway, GatewayError> {
        let mode = if let Some(path) = self.replay_path {
            Mode::Replay(ReplayStore::from_cassette(Cassette::load(&path)?))
        } else if let Some(path) = self.record_path {
            Mode::Record(Recorder::create(&path)?)
        } else {
            Mode::Off
        };
        Ok(Gateway {
            completion: self.completion,
            embeddings: self.embeddings,
            http: self.http,
            embedding_model: self.embedding_model.unwrap_or_default(),
            mode,
        })
    }
}
