//! Application configuration: a flat key-value config file, environment
//! variables for secrets, and the wiring that turns settings into a
//! gateway, pipeline, tools, and agents.
//!
//! Config file format: one `key = value` per line, `#` comments. Every
//! CLI flag has a file equivalent; flags override the file. Secrets are
//! only ever read from environment variables named in the config.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::agent::{AgentConfig, FewShotExample, PoolError, ReactAgent};
use crate::codeact::{BindingTable, CodeActAgent, CodeActConfig};
use crate::gateway::{
    Gateway, GatewayError, LiveCompletionProvider, LiveEmbeddingProvider, LiveHttpBackend,
    MockEmbeddings, MockLlm, ProviderConfig,
};
use crate::search::{
    EmbeddingReranker, LexicalReranker, SearchConfig, SearchPipeline, SiteHandlers,
};
use crate::toolbox::{registry_default, Calculator, RemoteMath, ToolRegistry};

pub const LLM_KEY_ENV: &str = "ODS_LLM_API_KEY";
pub const SERP_KEY_ENV: &str = "ODS_SERP_API_KEY";
pub const LLM_BASE_URL_ENV: &str = "ODS_LLM_BASE_URL";
pub const MATH_KEY_ENV: &str = "ODS_MATH_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad config line {line}: expected `key = value`")]
    BadLine { line: usize },
    #[error("unknown config key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },
    #[error("bad value for `{key}`: {value}")]
    BadValue { key: String, value: String },
    #[error("replay mode requires an existing cassette: {path} not found")]
    MissingCassette { path: PathBuf },
    #[error("cassette mode {mode} requires cassette.path")]
    MissingCassettePath { mode: &'static str },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Search(#[from] crate::search::SearchError),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("{0}")]
    Invalid(String),
}

/// Which reasoning loop `ask`/`eval` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentVersion {
    V1,
    V2,
}

impl AgentVersion {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v1" => Some(AgentVersion::V1),
            "v2" => Some(AgentVersion::V2),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AgentVersion::V1 => "v1",
            AgentVersion::V2 => "v2",
        }
    }
}

/// Cassette handling for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CassetteMode {
    Off,
    Record,
    Replay,
}

/// One provider endpoint.
#[derive(Debug, Clone, Serialize)]
pub struct ProviderSettings {
    /// "http" for a live endpoint, "mock" for the built-in test provider.
    pub provider: String,
    pub base_url: String,
    pub model: String,
    pub key_env: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MathApiSettings {
    pub base_url: String,
    pub key_env: String,
}

/// Everything a run needs, with file/flag/env layering applied.
#[derive(Debug, Clone, Serialize)]
pub struct AppConfig {
    pub llm: ProviderSettings,
    pub embedding: ProviderSettings,
    /// Mock embedding dimension (used when embedding.provider = mock).
    pub embedding_dim: usize,
    pub serp_base_url: String,
    pub serp_key_env: String,
    pub math_api: Option<MathApiSettings>,
    pub search: SearchConfig,
    /// "embedding" or "lexical".
    pub reranker: String,
    pub handlers: SiteHandlers,
    pub agent_version: AgentVersion,
    pub agent: AgentConfig,
    pub codeact: CodeActConfig,
    pub cassette_mode: CassetteMode,
    pub cassette_path: Option<PathBuf>,
    pub pool_path: Option<PathBuf>,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            llm: ProviderSettings {
                provider: "http".into(),
                base_url: "https://api.openai.com/v1".into(),
                model: "gpt-4o-mini".into(),
                key_env: LLM_KEY_ENV.into(),
            },
            embedding: ProviderSettings {
                provider: "http".into(),
                base_url: "https://api.openai.com/v1".into(),
                model: "text-embedding-3-small".into(),
                key_env: LLM_KEY_ENV.into(),
            },
            embedding_dim: 64,
            serp_base_url: "https://google.serper.dev/search".into(),
            serp_key_env: SERP_KEY_ENV.into(),
            math_api: None,
            search: SearchConfig::default(),
            reranker: "embedding".into(),
            handlers: SiteHandlers::default(),
            agent_version: AgentVersion::V1,
            agent: AgentConfig::default(),
            codeact: CodeActConfig::default(),
            cassette_mode: CassetteMode::Off,
            cassette_path: None,
            pool_path: None,
        }
    }
}

impl AppConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), source: e })?;
        let mut config = AppConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::BadLine { line: lineno + 1 })?;
            config.apply(key.trim(), value.trim(), lineno + 1)?;
        }
        Ok(config)
    }

    /// Applies one `key = value` setting.
    pub fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        fn bad(key: &str, value: &str) -> ConfigError {
            ConfigError::BadValue { key: key.into(), value: value.into() }
        }
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| bad(key, value))
        }
        fn list(value: &str) -> Vec<String> {
            value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        }
        match key {
            "llm.provider" => self.llm.provider = value.into(),
            "llm.base_url" => self.llm.base_url = value.into(),
            "llm.model" => self.llm.model = value.into(),
            "llm.key_env" => self.llm.key_env = value.into(),
            "llm.judge_model" => self.agent.judge_model = Some(value.into()),
            "embedding.provider" => self.embedding.provider = value.into(),
            "embedding.base_url" => self.embedding.base_url = value.into(),
            "embedding.model" => self.embedding.model = value.into(),
            "embedding.key_env" => self.embedding.key_env = value.into(),
            "embedding.dim" => self.embedding_dim = parse(key, value)?,
            "serp.base_url" => self.serp_base_url = value.into(),
            "serp.key_env" => self.serp_key_env = value.into(),
            "math.base_url" => {
                self.math_api = Some(MathApiSettings {
                    base_url: value.into(),
                    key_env: self
                        .math_api
                        .as_ref()
                        .map(|m| m.key_env.clone())
                        .unwrap_or_else(|| MATH_KEY_ENV.into()),
                })
            }
            "math.key_env" => {
                let base_url =
                    self.math_api.as_ref().map(|m| m.base_url.clone()).unwrap_or_default();
                self.math_api = Some(MathApiSettings { base_url, key_env: value.into() });
            }
            "search.rephrase_count" => self.search.rephrase_count = parse(key, value)?,
            "search.top_n_snippets" => self.search.top_n_snippets = parse(key, value)?,
            "search.pages_to_scrape" => self.search.pages_to_scrape = parse(key, value)?,
            "search.passages_per_page" => self.search.passages_per_page = parse(key, value)?,
            "search.relevance_threshold" => self.search.relevance_threshold = parse(key, value)?,
            "search.chunk_size" => self.search.chunk_size = parse(key, value)?,
            "search.chunk_overlap" => self.search.chunk_overlap = parse(key, value)?,
            "search.reranker" => match value {
                "embedding" | "lexical" => self.reranker = value.into(),
                _ => return Err(bad(key, value)),
            },
            "handlers.encyclopedia" => self.handlers.encyclopedia = list(value),
            "handlers.preprint" => self.handlers.preprint = list(value),
            "handlers.biomedical" => self.handlers.biomedical = list(value),
            "agent.version" => {
                self.agent_version =
                    AgentVersion::parse(value).ok_or_else(|| bad(key, value))?
            }
            "agent.max_steps" => self.agent.max_steps = parse(key, value)?,
            "agent.few_shots" => self.agent.few_shot_count = parse(key, value)?,
            "agent.max_rounds" => self.codeact.max_rounds = parse(key, value)?,
            "agent.step_budget" => self.codeact.step_budget = parse(key, value)?,
            "consistency.samples" => {
                self.agent.consistency.samples = parse(key, value)?;
                self.codeact.consistency.samples = self.agent.consistency.samples;
            }
            "consistency.temperature" => {
                self.agent.consistency.temperature = parse(key, value)?;
                self.codeact.consistency.temperature = self.agent.consistency.temperature;
            }
            "consistency.seed" => {
                self.agent.consistency.seed = parse(key, value)?;
                self.codeact.consistency.seed = self.agent.consistency.seed;
            }
            "cassette.mode" => {
                self.cassette_mode = match value {
                    "off" => CassetteMode::Off,
                    "record" => CassetteMode::Record,
                    "replay" => CassetteMode::Replay,
                    _ => return Err(bad(key, value)),
                }
            }
            "cassette.path" => self.cassette_path = Some(PathBuf::from(value)),
            "pool.path" => self.pool_path = Some(PathBuf::from(value)),
            _ => return Err(ConfigError::UnknownKey { key: key.into(), line }),
        }
        Ok(())
    }

    /// Validates cross-field invariants and resolves the cassette path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.search.validate()?;
        match self.cassette_mode {
            CassetteMode::Replay => match &self.cassette_path {
                None => return Err(ConfigError::MissingCassettePath { mode: "replay" }),
                Some(path) if !path.exists() => {
                    return Err(ConfigError::MissingCassette { path: path.clone() })
                }
                Some(_) => {}
            },
            CassetteMode::Record | CassetteMode::Off => {}
        }
        Ok(())
    }

    /// The effective configuration echoed into traces and reports.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }

    /// Builds the gateway. In replay mode no provider or backend is
    /// attached, so nothing can reach the network.
    pub fn build_gateway(&self) -> Result<Gateway, ConfigError> {
        let mut builder = Gateway::builder().embedding_model(&self.embedding.model);
        match self.cassette_mode {
            CassetteMode::Replay => {
                let path = self
                    .cassette_path
                    .as_ref()
                    .ok_or(ConfigError::MissingCassettePath { mode: "replay" })?;
                if !path.exists() {
                    return Err(ConfigError::MissingCassette { path: path.clone() });
                }
                builder = builder.replay_from(path);
                return Ok(builder.build()?);
            }
            CassetteMode::Record => {
                let path = match &self.cassette_path {
                    Some(p) => p.clone(),
                    None => default_cassette_path(),
                };
                builder = builder.record_to(path);
            }
            CassetteMode::Off => {}
        }
        match self.llm.provider.as_str() {
            "mock" => builder = builder.completion(Arc::new(MockLlm::new())),
            _ => {
                let base_url = std::env::var(LLM_BASE_URL_ENV)
                    .unwrap_or_else(|_| self.llm.base_url.clone());
                builder = builder.completion(Arc::new(LiveCompletionProvider::new(
                    ProviderConfig {
                        base_url,
                        model: self.llm.model.clone(),
                        key_env: self.llm.key_env.clone(),
                    },
                )?));
            }
        }
        match self.embedding.provider.as_str() {
            "mock" => {
                builder = builder.embeddings(Arc::new(MockEmbeddings::hashed(self.embedding_dim)))
            }
            _ => {
                builder = builder.embeddings(Arc::new(LiveEmbeddingProvider::new(
                    ProviderConfig {
                        base_url: self.embedding.base_url.clone(),
                        model: self.embedding.model.clone(),
                        key_env: self.embedding.key_env.clone(),
                    },
                )?));
            }
        }
        builder = builder.http(Arc::new(LiveHttpBackend::new(
            std::time::Duration::from_secs(10),
        )?));
        Ok(builder.build()?)
    }

    pub fn build_pipeline(&self, gateway: Arc<Gateway>) -> Arc<SearchPipeline> {
        let mut pipeline = SearchPipeline::new(gateway.clone(), self.search.clone())
            .with_serp_endpoint(self.serp_base_url.clone())
            .with_handlers(self.handlers.clone());
        pipeline.serp_key_env = self.serp_key_env.clone();
        if self.reranker == "embedding" {
            pipeline = pipeline.with_reranker(Arc::new(EmbeddingReranker::new(gateway)));
        } else {
            pipeline = pipeline.with_reranker(Arc::new(LexicalReranker));
        }
        Arc::new(pipeline)
    }

    pub fn build_tools(&self, pipeline: Arc<SearchPipeline>, gateway: Arc<Gateway>) -> ToolRegistry {
        let calculator = match &self.math_api {
            Some(math) => Calculator::with_remote(RemoteMath {
                gateway: gateway.clone(),
                base_url: math.base_url.clone(),
                key_env: math.key_env.clone(),
            }),
            None => Calculator::local_only(),
        };
        registry_default(pipeline, gateway, calculator)
    }

    /// Loads the few-shot pool when configured and needed.
    pub fn load_pool(&self, gateway: &Gateway) -> Result<Vec<FewShotExample>, ConfigError> {
        if self.agent.few_shot_count == 0 {
            return Ok(Vec::new());
        }
        match &self.pool_path {
            Some(path) if path.exists() => Ok(crate::agent::load_pool(path, gateway)?),
            _ => Ok(Vec::new()),
        }
    }

    pub fn build_react_agent(&self) -> Result<ReactAgent, ConfigError> {
        let gateway = Arc::new(self.build_gateway()?);
        let pipeline = self.build_pipeline(gateway.clone());
        let tools = self.build_tools(pipeline.clone(), gateway.clone());
        let pool = self.load_pool(&gateway)?;
        Ok(ReactAgent { gateway, pipeline, tools, pool, config: self.agent.clone() })
    }

    pub fn build_codeact_agent(&self) -> Result<CodeActAgent, ConfigError> {
        let gateway = Arc::new(self.build_gateway()?);
        let pipeline = self.build_pipeline(gateway.clone());
        let tools = self.build_tools(pipeline, gateway.clone());
        Ok(CodeActAgent {
            gateway,
            tools,
            bindings: BindingTable::standard(),
            config: self.codeact.clone(),
        })
    }
}

fn default_cassette_path() -> PathBuf {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    PathBuf::from(format!("run-{stamp}.cassette"))
}
