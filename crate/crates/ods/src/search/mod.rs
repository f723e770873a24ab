//! The search pipeline: query rephrasing, SERP retrieval, page scraping,
//! chunking, and threshold reranking into one prompt-ready context.

pub mod chunk;
pub mod render;
pub mod rerank;
pub mod scrape;
pub mod serp;

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::gateway::{CompletionRequest, Gateway, GatewayError, Message};

pub use chunk::{char_slice, chunk_document, Chunk};
pub use render::{format_context, RELIABILITY_INSTRUCTION};
pub use rerank::{rerank_chunks, EmbeddingReranker, LexicalReranker, PageChunks, Reranker};
pub use scrape::{scrape_page, scrape_route, ScrapeRoute, ScrapedPage, SiteHandlers};
pub use serp::serp_fetch;

/// Pipeline errors. Page-level failures are recoverable and reported per
/// URL; only a fully failed retrieval aborts a context build.
#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("query must be non-empty")]
    EmptyQuery,
    #[error(transparent)]
    Gateway(GatewayError),
    #[error("search provider returned status {0}")]
    SerpStatus(u16),
    #[error("malformed search provider response: {0}")]
    SerpFormat(String),
    #[error("invalid url: {0}")]
    BadUrl(String),
    #[error("fetch failed: {0}")]
    Fetch(String),
    #[error("fetch failed with status {0}")]
    FetchStatus(u16),
    #[error("fetch timed out")]
    Timeout,
    #[error("every search call failed; retrieval unavailable")]
    SearchUnavailable,
    #[error("could not parse rephrasings from model output: {0}")]
    RephraseParse(String),
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
}

/// Pipeline knobs. The defaults keep contexts under typical prompt
/// budgets; everything is overridable from the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Number of rephrased queries generated in addition to the original.
    pub rephrase_count: usize,
    /// Snippets kept (and rendered) after merging all SERP calls.
    pub top_n_snippets: usize,
    /// Links scraped, taken from the top of the merged snippet list.
    pub pages_to_scrape: usize,
    /// Passages kept per scraped page.
    pub passages_per_page: usize,
    /// Minimum reranker score for a passage to enter the context.
    pub relevance_threshold: f64,
    /// Chunk length in characters.
    pub chunk_size: usize,
    /// Overlap between consecutive chunks, in characters.
    pub chunk_overlap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            rephrase_count: 2,
            top_n_snippets: 8,
            pages_to_scrape: 3,
            passages_per_page: 4,
            relevance_threshold: 0.55,
            chunk_size: 1024,
            chunk_overlap: 128,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.top_n_snippets == 0 || self.pages_to_scrape == 0 || self.passages_per_page == 0 {
            return Err(SearchError::InvalidConfig(
                "top_n_snippets, pages_to_scrape, and passages_per_page must be positive".into(),
            ));
        }
        if self.pages_to_scrape > self.top_n_snippets {
            return Err(SearchError::InvalidConfig(format!(
                "pages_to_scrape ({}) must not exceed top_n_snippets ({})",
                self.pages_to_scrape, self.top_n_snippets
            )));
        }
        if self.chunk_size == 0 || self.chunk_overlap >= self.chunk_size {
            return Err(SearchError::InvalidConfig(format!(
                "chunk_overlap ({}) must be smaller than chunk_size ({})",
                self.chunk_overlap, self.chunk_size
            )));
        }
        if !(0.0..=1.0).contains(&self.relevance_threshold) {
            return Err(SearchError::InvalidConfig(
                "relevance_threshold must be within [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One organic search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerpResult {
    pub title: String,
    pub url: String,
    pub description: String,
    pub date: Option<String>,
    pub rank: usize,
    pub source_query: String,
}

/// One reranked passage extracted from a scraped page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub text: String,
    pub source_url: String,
    pub score: f64,
    pub char_span: (usize, usize),
}

/// The evidence block fed to an agent: snippets, passages, and their
/// deterministic rendering.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SearchContext {
    pub query: String,
    pub rephrasings: Vec<String>,
    pub snippets: Vec<SerpResult>,
    pub passages: Vec<Passage>,
    pub rendered: String,
}

impl SearchContext {
    /// A context carrying only the query and the fixed instruction; used
    /// when retrieval is unavailable.
    pub fn empty(query: &str) -> Self {
        let mut ctx = SearchContext { query: query.to_string(), ..Default::default() };
        ctx.rendered = format_context(&ctx, &SearchConfig::default());
        ctx
    }
}

/// How the pipeline reaches its providers.
#[derive(Clone)]
pub struct SearchPipeline {
    pub gateway: Arc<Gateway>,
    pub config: SearchConfig,
    pub reranker: Arc<dyn Reranker>,
    pub handlers: SiteHandlers,
    pub serp_base_url: String,
    pub serp_key_env: String,
    /// Worker pool width for page scrapes.
    pub scrape_workers: usize,
    /// Total wall-clock budget for the augmentation stage.
    pub augmentation_budget: Duration,
}

impl SearchPipeline {
    pub fn new(gateway: Arc<Gateway>, config: SearchConfig) -> Self {
        SearchPipeline {
            gateway,
            config,
            reranker: Arc::new(LexicalReranker),
            handlers: SiteHandlers::default(),
            serp_base_url: "https://google.serper.dev/search".into(),
            serp_key_env: "ODS_SERP_API_KEY".into(),
            scrape_workers: 4,
            augmentation_budget: Duration::from_secs(30),
        }
    }

    pub fn with_reranker(mut self, reranker: Arc<dyn Reranker>) -> Self {
        self.reranker = reranker;
        self
    }

    pub fn with_serp_endpoint(mut self, base_url: impl Into<String>) -> Self {
        self.serp_base_url = base_url.into();
        self
    }

    pub fn with_handlers(mut self, handlers: SiteHandlers) -> Self {
        self.handlers = handlers;
        self
    }

    /// Returns the original query followed by up to `count` rephrasings,
    /// deduplicated case-insensitively. `count == 0` makes no model call.
    pub fn rephrase_query(&self, query: &str, count: usize) -> Result<Vec<String>, SearchError> {
        if query.trim().is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        if count == 0 {
            return Ok(vec![query.to_string()]);
        }
        let prompt = format!(
            "Rewrite the search query below into {count} alternative search queries that keep \
             the original intent but broaden coverage.\nReturn exactly {count} lines, one query \
             per line, numbered.\n\nQuery: {query}"
        );
        let req = CompletionRequest::new(vec![Message::user(prompt)])
            .expect("static prompt is non-empty")
            .with_max_tokens(256);
        let output = self.gateway.complete(&req).map_err(SearchError::Gateway)?;
        let mut seen: Vec<String> = vec![query.to_lowercase()];
        let mut rephrasings = Vec::new();
        for line in output.lines() {
            let cleaned = strip_listing_prefix(line);
            if cleaned.is_empty() {
                continue;
            }
            let folded = cleaned.to_lowercase();
            if seen.contains(&folded) {
                continue;
            }
            seen.push(folded);
            rephrasings.push(cleaned.to_string());
            if rephrasings.len() == count {
                break;
            }
        }
        if rephrasings.is_empty() {
            return Err(SearchError::RephraseParse(format!(
                "no usable lines in model output: {output:?}"
            )));
        }
        let mut all = vec![query.to_string()];
        all.extend(rephrasings);
        Ok(all)
    }

    pub fn serp_fetch(&self, query: &str, num: usize) -> Result<Vec<SerpResult>, SearchError> {
        serp_fetch(&self.gateway, &self.serp_base_url, &self.serp_key_env, query, num)
    }

    pub fn scrape_page(&self, url: &str) -> Result<ScrapedPage, SearchError> {
        scrape_page(&self.gateway, url, &self.handlers)
    }

    /// Runs the full pipeline: rephrase, retrieve per query, merge and
    /// dedupe snippets, scrape the top links, chunk, rerank, render.
    /// Partial page failures reduce passages but never abort; only a
    /// fully failed retrieval does.
    pub fn build_context(&self, query: &str) -> Result<SearchContext, SearchError> {
        if query.trim().is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        self.config.validate()?;

        // A failed rephrase degrades to the original query only.
        let queries = match self.rephrase_query(query, self.config.rephrase_count) {
            Ok(qs) => qs,
            Err(SearchError::EmptyQuery) => return Err(SearchError::EmptyQuery),
            Err(_) => vec![query.to_string()],
        };
        let rephrasings: Vec<String> = queries.iter().skip(1).cloned().collect();

        let mut any_serp_ok = false;
        let mut merged: Vec<SerpResult> = Vec::new();
        for q in &queries {
            match self.serp_fetch(q, self.config.top_n_snippets) {
                Ok(results) => {
                    any_serp_ok = true;
                    for result in results {
                        match merged.iter_mut().find(|m| m.url == result.url) {
                            // Keep the provider's strongest placement.
                            Some(existing) => {
                                if result.rank < existing.rank {
                                    *existing = result;
                                }
                            }
                            None => merged.push(result),
                        }
                    }
                }
                Err(_) => continue,
            }
        }
        if !any_serp_ok {
            return Err(SearchError::SearchUnavailable);
        }
        merged.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.url.cmp(&b.url)));
        merged.truncate(self.config.top_n_snippets);

        let scrape_urls: Vec<String> = merged
            .iter()
            .take(self.config.pages_to_scrape)
            .map(|s| s.url.clone())
            .collect();
        let scraped = self.scrape_all(&scrape_urls);

        let mut pages = Vec::new();
        for page in scraped.into_iter().flatten() {
            let chunks = chunk_document(&page.text, self.config.chunk_size, self.config.chunk_overlap);
            if !chunks.is_empty() {
                pages.push(PageChunks { source_url: page.url, chunks });
            }
        }
        let passages = rerank_chunks(query, &pages, &self.config, self.reranker.as_ref())?;

        let mut ctx = SearchContext {
            query: query.to_string(),
            rephrasings,
            snippets: merged,
            passages,
            rendered: String::new(),
        };
        ctx.rendered = format_context(&ctx, &self.config);
        Ok(ctx)
    }

    /// Scrapes `urls` on a bounded worker pool with at most one in-flight
    /// request per host. Results keep input order; failures are per-URL.
    fn scrape_all(&self, urls: &[String]) -> Vec<Result<ScrapedPage, SearchError>> {
        if urls.is_empty() {
            return Vec::new();
        }
        let deadline = Instant::now() + self.augmentation_budget;

        // Group URL indices by host; one worker owns a host's whole queue,
        // which serializes requests per host.
        let mut host_queues: Vec<Vec<usize>> = Vec::new();
        let mut hosts: Vec<String> = Vec::new();
        for (i, u) in urls.iter().enumerate() {
            let host = url::Url::parse(u)
                .ok()
                .and_then(|p| p.host_str().map(str::to_string))
                .unwrap_or_default();
            match hosts.iter().position(|h| *h == host) {
                Some(pos) => host_queues[pos].push(i),
                None => {
                    hosts.push(host);
                    host_queues.push(vec![i]);
                }
            }
        }

        let work: Mutex<VecDeque<Vec<usize>>> = Mutex::new(host_queues.into_iter().collect());
        let results: Mutex<Vec<Option<Result<ScrapedPage, SearchError>>>> =
            Mutex::new((0..urls.len()).map(|_| None).collect());

        let width = self.scrape_workers.max(1).min(urls.len());
        std::thread::scope(|scope| {
            for _ in 0..width {
                scope.spawn(|| loop {
                    let queue = { work.lock().expect("scrape queue").pop_front() };
                    let Some(queue) = queue else { break };
                    for index in queue {
                        let outcome = if Instant::now() > deadline {
                            Err(SearchError::Timeout)
                        } else {
                            self.scrape_page(&urls[index])
                        };
                        results.lock().expect("scrape results")[index] = Some(outcome);
                    }
                });
            }
        });

        results
            .into_inner()
            .expect("scrape results")
            .into_iter()
            .map(|r| r.expect("every url visited"))
            .collect()
    }
}

fn strip_listing_prefix(line: &str) -> &str {
    let trimmed = line.trim();
    let no_bullet = trimmed
        .strip_prefix("- ")
        .or_else(|| trimmed.strip_prefix("* "))
        .unwrap_or(trimmed);
    let digits_end = no_bullet.find(|c: char| !c.is_ascii_digit()).unwrap_or(no_bullet.len());
    if digits_end > 0 {
        let after = &no_bullet[digits_end..];
        if let Some(rest) = after.strip_prefix('.').or_else(|| after.strip_prefix(')')) {
            return rest.trim();
        }
    }
    no_bullet.trim()
}
