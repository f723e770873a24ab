//! Chunk scoring and threshold reranking.
//!
//! The scorer is pluggable: the default embeds query and chunks and maps
//! cosine similarity from [-1, 1] onto [0, 1]; a lexical-overlap scorer is
//! available as an offline fallback that needs no provider.

use std::sync::Arc;

use crate::gateway::{cosine, Gateway};

use super::chunk::Chunk;
use super::{Passage, SearchConfig, SearchError};

/// Scores chunks against a query; scores live in [0, 1].
pub trait Reranker: Send + Sync {
    fn score(&self, query: &str, texts: &[String]) -> Result<Vec<f64>, SearchError>;
}

/// Embedding-cosine scorer (the default).
pub struct EmbeddingReranker {
    gateway: Arc<Gateway>,
}

impl EmbeddingReranker {
    pub fn new(gateway: Arc<Gateway>) -> Self {
        EmbeddingReranker { gateway }
    }
}

impl Reranker for EmbeddingReranker {
    fn score(&self, query: &str, texts: &[String]) -> Result<Vec<f64>, SearchError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut inputs = Vec::with_capacity(texts.len() + 1);
        inputs.push(query.to_string());
        inputs.extend(texts.iter().cloned());
        let vectors = self.gateway.embed(&inputs).map_err(SearchError::Gateway)?;
        let query_vec = &vectors[0];
        Ok(vectors[1..]
            .iter()
            .map(|v| (cosine(&query_vec.values, &v.values) + 1.0) / 2.0)
            .collect())
    }
}

/// Lexical token-overlap scorer: |query ∩ chunk| / |query| over lowercased
/// alphanumeric tokens. Deterministic and provider-free.
pub struct LexicalReranker;

fn tokens(s: &str) -> Vec<String> {
    s.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl Reranker for LexicalReranker {
    fn score(&self, query: &str, texts: &[String]) -> Result<Vec<f64>, SearchError> {
        let query_tokens: std::collections::BTreeSet<String> = tokens(query).into_iter().collect();
        if query_tokens.is_empty() {
            return Ok(vec![0.0; texts.len()]);
        }
        Ok(texts
            .iter()
            .map(|t| {
                let chunk_tokens: std::collections::BTreeSet<String> =
                    tokens(t).into_iter().collect();
                let hits = query_tokens.intersection(&chunk_tokens).count();
                hits as f64 / query_tokens.len() as f64
            })
            .collect())
    }
}

/// Chunks from one scraped page.
#[derive(Debug, Clone)]
pub struct PageChunks {
    pub source_url: String,
    pub chunks: Vec<Chunk>,
}

/// Scores every chunk, keeps per page the top `n` at or above the
/// relevance threshold, and returns the merged list sorted by score
/// descending with ties broken by (source_url, span start).
pub fn rerank_chunks(
    query: &str,
    pages: &[PageChunks],
    cfg: &SearchConfig,
    reranker: &dyn Reranker,
) -> Result<Vec<Passage>, SearchError> {
    let mut passages = Vec::new();
    for page in pages {
        if page.chunks.is_empty() {
            continue;
        }
        let texts: Vec<String> = page.chunks.iter().map(|c| c.text.clone()).collect();
        let scores = reranker.score(query, &texts)?;
        let mut page_passages: Vec<Passage> = page
            .chunks
            .iter()
            .zip(scores.iter())
            .filter(|(_, s)| **s >= cfg.relevance_threshold)
            .map(|(chunk, score)| Passage {
                text: chunk.text.clone(),
                source_url: page.source_url.clone(),
                score: *score,
                char_span: chunk.span,
            })
            .collect();
        sort_passages(&mut page_passages);
        page_passages.truncate(cfg.passages_per_page);
        passages.extend(page_passages);
    }
    sort_passages(&mut passages);
    Ok(passages)
}

/// Descending score, ties by (source_url, span start).
pub fn sort_passages(passages: &mut [Passage]) {
    passages.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.source_url.cmp(&b.source_url))
            .then_with(|| a.char_span.0.cmp(&b.char_span.0))
    });
}
