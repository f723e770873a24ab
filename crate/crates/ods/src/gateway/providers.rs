//! Provider traits and the live HTTP-backed implementations.
//!
//! Live providers speak the common chat-completion and embedding wire
//! shapes: request `{model, messages[{role,content}], temperature,
//! max_tokens, stop}` with response `{choices[0].message.content}`, and
//! request `{model, input[]}` with response `{data[i].embedding[]}`.

use std::time::Duration;

use serde::Deserialize;

use super::request::{
    CompletionRequest, EmbeddingVector, HttpMethod, HttpRequestSpec, HttpResponse,
};
use super::GatewayError;

/// Text-completion backend.
pub trait CompletionProvider: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError>;
}

/// Embedding backend.
pub trait EmbeddingProvider: Send + Sync {
    /// Model identifier stamped onto produced vectors and into digests.
    fn model_id(&self) -> &str;
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, GatewayError>;
}

/// Raw HTTP backend used by the SERP client, page scraper, and remote
/// math adapter.
pub trait HttpBackend: Send + Sync {
    fn execute(&self, req: &HttpRequestSpec) -> Result<HttpResponse, GatewayError>;
}

const RETRY_ATTEMPTS: u32 = 3;

/// Runs `op` under the fixed 3-attempt exponential policy. Only transient
/// failures (transport errors, HTTP 429/5xx) are retried.
fn with_retries<T>(
    mut op: impl FnMut() -> Result<T, GatewayError>,
) -> Result<T, GatewayError> {
    let mut last = None;
    for attempt in 0..RETRY_ATTEMPTS {
        match op() {
            Ok(v) => return Ok(v),
            Err(e) if e.is_transient() => {
                if attempt + 1 < RETRY_ATTEMPTS {
                    std::thread::sleep(Duration::from_millis(200 * (1 << attempt)));
                }
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Live HTTP backend over a blocking client.
pub struct LiveHttpBackend {
    client: reqwest::blocking::Client,
}

impl LiveHttpBackend {
    pub fn new(timeout: Duration) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GatewayError::Provider(e.to_string()))?;
        Ok(LiveHttpBackend { client })
    }
}

impl HttpBackend for LiveHttpBackend {
    fn execute(&self, req: &HttpRequestSpec) -> Result<HttpResponse, GatewayError> {
        with_retries(|| {
            let mut url = req.url.clone();
            if let Some((name, value)) = &req.auth_query {
                let sep = if url.contains('?') { '&' } else { '?' };
                url.push(sep);
                url.push_str(name);
                url.push('=');
                url.push_str(value);
            }
            let mut builder = match req.method {
                HttpMethod::Get => self.client.get(&url),
                HttpMethod::Post => self.client.post(&url),
            };
            for (name, value) in &req.headers {
                builder = builder.header(name, value);
            }
            if let Some(body) = &req.body {
                builder = builder.body(body.clone());
            }
            let resp = builder.send().map_err(|e| {
                if e.is_timeout() {
                    GatewayError::Timeout
                } else {
                    GatewayError::Transport(e.to_string())
                }
            })?;
            let status = resp.status().as_u16();
            let body = resp
                .bytes()
                .map_err(|e| GatewayError::Transport(e.to_string()))?
                .to_vec();
            if status == 429 || status >= 500 {
                return Err(GatewayError::HttpStatus(status));
            }
            Ok(HttpResponse { status, body })
        })
    }
}

/// Configuration of a live provider endpoint.
#[derive(Debug, Clone)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub key_env: String,
}

impl ProviderConfig {
    fn api_key(&self) -> Result<String, GatewayError> {
        std::env::var(&self.key_env)
            .map_err(|_| GatewayError::MissingKey(self.key_env.clone()))
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

/// Chat-completion provider over HTTP.
pub struct LiveCompletionProvider {
    config: ProviderConfig,
    http: LiveHttpBackend,
}

impl LiveCompletionProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, GatewayError> {
        Ok(LiveCompletionProvider { config, http: LiveHttpBackend::new(Duration::from_secs(120))? })
    }
}

impl CompletionProvider for LiveCompletionProvider {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        let key = self.config.api_key()?;
        let messages: Vec<serde_json::Value> = req
            .messages
            .iter()
            .map(|m| serde_json::json!({"role": m.role.as_str(), "content": m.content}))
            .collect();
        let body = serde_json::json!({
            "model": req.model.as_deref().unwrap_or(&self.config.model),
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
            "stop": req.stop_sequences,
        });
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let http_req = HttpRequestSpec::post(url, body.to_string())
            .with_header("Authorization", format!("Bearer {key}"))
            .with_header("Content-Type", "application/json");
        let resp = self.http.execute(&http_req)?;
        if resp.status >= 400 {
            return Err(GatewayError::HttpStatus(resp.status));
        }
        let parsed: ChatResponse = serde_json::from_slice(&resp.body)
            .map_err(|e| GatewayError::Provider(format!("bad completion response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| GatewayError::Provider("completion response had no choices".into()))
    }
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

/// Embedding provider over HTTP.
pub struct LiveEmbeddingProvider {
    config: ProviderConfig,
    http: LiveHttpBackend,
}

impl LiveEmbeddingProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, GatewayError> {
        Ok(LiveEmbeddingProvider { config, http: LiveHttpBackend::new(Duration::from_secs(60))? })
    }
}

impl EmbeddingProvider for LiveEmbeddingProvider {
    fn model_id(&self) -> &str {
        &self.config.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, GatewayError> {
        let key = self.config.api_key()?;
        let body = serde_json::json!({"model": self.config.model, "input": texts});
        let url = format!("{}/embeddings", self.config.base_url.trim_end_matches('/'));
        let http_req = HttpRequestSpec::post(url, body.to_string())
            .with_header("Authorization", format!("Bearer {key}"))
            .with_header("Content-Type", "application/json");
        let resp = self.http.execute(&http_req)?;
        if resp.status >= 400 {
            return Err(GatewayError::HttpStatus(resp.status));
        }
        let parsed: EmbeddingResponse = serde_json::from_slice(&resp.body)
            .map_err(|e| GatewayError::Provider(format!("bad embedding response: {e}")))?;
        if parsed.data.len() != texts.len() {
            return Err(GatewayError::Provider(format!(
                "embedding count mismatch: sent {}, got {}",
                texts.len(),
                parsed.data.len()
            )));
        }
        Ok(parsed
            .data
            .into_iter()
            .map(|d| EmbeddingVector { values: d.embedding, model_id: self.config.model.clone() })
            .collect())
    }
}
