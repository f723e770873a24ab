//! Mock providers for tests, fixtures, and offline demos.
//!
//! `MockLlm` matches scripted rules against the rendered prompt (all rule
//! substrings must appear) and falls back to a FIFO queue, so a single mock
//! can drive both keyed prompts (judge calls) and ordered draws
//! (self-consistency samples). `MockEmbeddings` derives a deterministic
//! pseudo-random unit vector from each text, which makes similarity
//! fixtures stable without shipping vector files.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::providers::{CompletionProvider, EmbeddingProvider, HttpBackend};
use super::request::{CompletionRequest, EmbeddingVector, HttpRequestSpec, HttpResponse};
use super::GatewayError;

/// One scripted completion rule.
#[derive(Debug, Clone)]
pub struct MockRule {
    /// Substrings that must all appear in the rendered prompt.
    pub requires: Vec<String>,
    /// Substrings that must not appear.
    pub forbids: Vec<String>,
    pub output: String,
    /// When true the rule is consumed after its first match.
    pub once: bool,
}

impl MockRule {
    pub fn when(requires: &[&str], output: &str) -> Self {
        MockRule {
            requires: requires.iter().map(|s| s.to_string()).collect(),
            forbids: Vec::new(),
            output: output.to_string(),
            once: false,
        }
    }

    pub fn once(mut self) -> Self {
        self.once = true;
        self
    }

    pub fn unless(mut self, forbids: &[&str]) -> Self {
        self.forbids = forbids.iter().map(|s| s.to_string()).collect();
        self
    }
}

#[derive(Default)]
struct MockLlmState {
    rules: Vec<(MockRule, bool)>, // (rule, spent)
    queue: VecDeque<Result<String, String>>,
}

/// Scripted completion provider.
#[derive(Default)]
pub struct MockLlm {
    state: Mutex<MockLlmState>,
}

impl MockLlm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rules(rules: Vec<MockRule>) -> Self {
        let mock = Self::new();
        {
            let mut state = mock.state.lock().unwrap();
            state.rules = rules.into_iter().map(|r| (r, false)).collect();
        }
        mock
    }

    pub fn with_queue(outputs: Vec<&str>) -> Self {
        let mock = Self::new();
        mock.push_all(outputs);
        mock
    }

    pub fn push(&self, output: &str) {
        self.state.lock().unwrap().queue.push_back(Ok(output.to_string()));
    }

    pub fn push_all(&self, outputs: Vec<&str>) {
        let mut state = self.state.lock().unwrap();
        for o in outputs {
            state.queue.push_back(Ok(o.to_string()));
        }
    }

    /// Queue a scripted failure.
    pub fn push_error(&self, message: &str) {
        self.state.lock().unwrap().queue.push_back(Err(message.to_string()));
    }

    fn rendered(req: &CompletionRequest) -> String {
        let mut out = String::new();
        for m in &req.messages {
            out.push_str(&m.content);
            out.push('\n');
        }
        out
    }
}

impl CompletionProvider for MockLlm {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        let prompt = Self::rendered(req);
        let mut state = self.state.lock().unwrap();
        for (rule, spent) in state.rules.iter_mut() {
            if *spent {
                continue;
            }
            let hit = rule.requires.iter().all(|s| prompt.contains(s.as_str()))
                && rule.forbids.iter().all(|s| !prompt.contains(s.as_str()));
            if hit {
                if rule.once {
                    *spent = true;
                }
                return Ok(rule.output.clone());
            }
        }
        match state.queue.pop_front() {
            Some(Ok(out)) => Ok(out),
            Some(Err(msg)) => Err(GatewayError::Provider(msg)),
            None => Err(GatewayError::Provider("mock llm: no scripted output matches".into())),
        }
    }
}

/// Deterministic embedding provider.
pub struct MockEmbeddings {
    model: String,
    dim: usize,
    scripted: Mutex<HashMap<String, Vec<f64>>>,
}

impl MockEmbeddings {
    /// Hash-derived unit vectors of the given dimension.
    pub fn hashed(dim: usize) -> Self {
        MockEmbeddings { model: format!("mock-embed-{dim}"), dim, scripted: Mutex::new(HashMap::new()) }
    }

    /// Pin an exact vector for one text; other texts fall back to hashing.
    pub fn script(&self, text: &str, vector: Vec<f64>) {
        self.scripted.lock().unwrap().insert(text.to_string(), vector);
    }

    fn vector_for(&self, text: &str) -> Vec<f64> {
        if let Some(v) = self.scripted.lock().unwrap().get(text) {
            return v.clone();
        }
        let digest = super::request::digest_bytes(text.as_bytes());
        let mut seed = [0u8; 32];
        for (i, chunk) in digest.as_bytes().chunks(2).take(32).enumerate() {
            seed[i] = u8::from_str_radix(std::str::from_utf8(chunk).unwrap(), 16).unwrap_or(0);
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

impl EmbeddingProvider for MockEmbeddings {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, GatewayError> {
        Ok(texts
            .iter()
            .map(|t| EmbeddingVector { values: self.vector_for(t), model_id: self.model.clone() })
            .collect())
    }
}

/// Scripted HTTP backend. Requests match by POST-body substring first,
/// then exact URL, then URL substring.
#[derive(Default)]
pub struct MockHttp {
    body_rules: Mutex<Vec<(String, HttpResponse)>>,
    responses: Mutex<HashMap<String, HttpResponse>>,
    fallbacks: Mutex<Vec<(String, HttpResponse)>>,
}

impl MockHttp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on_url(&self, url: &str, response: HttpResponse) {
        self.responses.lock().unwrap().insert(url.to_string(), response);
    }

    pub fn on_url_containing(&self, fragment: &str, response: HttpResponse) {
        self.fallbacks.lock().unwrap().push((fragment.to_string(), response));
    }

    /// Matches on the request body, which distinguishes search calls that
    /// share one endpoint.
    pub fn on_body_containing(&self, fragment: &str, response: HttpResponse) {
        self.body_rules.lock().unwrap().push((fragment.to_string(), response));
    }
}

impl HttpBackend for MockHttp {
    fn execute(&self, req: &HttpRequestSpec) -> Result<HttpResponse, GatewayError> {
        if let Some(body) = &req.body {
            for (fragment, resp) in self.body_rules.lock().unwrap().iter() {
                if body.contains(fragment.as_str()) {
                    return Ok(resp.clone());
                }
            }
        }
        if let Some(resp) = self.responses.lock().unwrap().get(&req.url) {
            return Ok(resp.clone());
        }
        for (fragment, resp) in self.fallbacks.lock().unwrap().iter() {
            if req.url.contains(fragment.as_str()) {
                return Ok(resp.clone());
            }
        }
        Err(GatewayError::Transport(format!("mock http: no response scripted for {}", req.url)))
    }
}
