//! Few-shot example pool: tagged transcripts plus question embeddings,
//! with dynamic selection by vector similarity.
//!
//! The pool file is plain text containing one tagged transcript per
//! record (`<Question>…</Final_Answer>`); records are located by their
//! `<Question>` openers, so transcripts can simply be concatenated.
//! Embeddings live in a JSONL sidecar (`<pool>.emb`) produced by
//! `pool-embed`, or are computed through the gateway at load time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gateway::{EmbeddingVector, Gateway, GatewayError};

use super::step::{parse_transcript, ParseError};

/// One worked example: its question, the full tagged transcript, and the
/// question's embedding.
#[derive(Debug, Clone)]
pub struct FewShotExample {
    pub question: String,
    pub transcript: String,
    pub embedding: EmbeddingVector,
}

#[derive(Debug, thiserror::Error)]
pub enum PoolError {
    #[error("cannot read pool file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("pool file {path} contains no records")]
    Empty { path: PathBuf },
    #[error("record {index} in {path} does not parse: {source}")]
    BadRecord { path: PathBuf, index: usize, source: ParseError },
    #[error("sidecar {path} is malformed at line {line}")]
    BadSidecar { path: PathBuf, line: usize },
    #[error("sidecar {path} covers {got} records, pool has {want}")]
    SidecarMismatch { path: PathBuf, got: usize, want: usize },
    #[error(transparent)]
    Gateway(GatewayError),
}

/// A parsed pool record before embeddings are attached.
#[derive(Debug, Clone)]
pub struct PoolRecord {
    pub question: String,
    pub transcript: String,
}

/// Splits the pool file into records and validates that every transcript
/// parses end to end under the step grammar.
pub fn load_pool_records(path: &Path) -> Result<Vec<PoolRecord>, PoolError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PoolError::Io { path: path.to_path_buf(), source: e })?;
    let lower = text.to_ascii_lowercase();
    let mut starts: Vec<usize> = Vec::new();
    let mut at = 0;
    while let Some(rel) = lower[at..].find("<question>") {
        starts.push(at + rel);
        at += rel + "<question>".len();
    }
    if starts.is_empty() {
        return Err(PoolError::Empty { path: path.to_path_buf() });
    }
    let mut records = Vec::new();
    for (i, &start) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(text.len());
        let transcript = text[start..end].trim().to_string();
        let (question, _steps) = parse_transcript(&transcript)
            .map_err(|e| PoolError::BadRecord { path: path.to_path_buf(), index: i, source: e })?;
        records.push(PoolRecord { question, transcript });
    }
    Ok(records)
}

#[derive(Serialize, Deserialize)]
struct SidecarRow {
    index: usize,
    question: String,
    model_id: String,
    vector: Vec<f64>,
}

/// Default sidecar path for a pool file.
pub fn sidecar_path(pool: &Path) -> PathBuf {
    let mut name = pool.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".emb");
    pool.with_file_name(name)
}

/// Embeds every pool question and writes the sidecar file.
pub fn write_sidecar(
    records: &[PoolRecord],
    gateway: &Gateway,
    path: &Path,
) -> Result<(), PoolError> {
    let questions: Vec<String> = records.iter().map(|r| r.question.clone()).collect();
    let vectors = gateway.embed(&questions).map_err(PoolError::Gateway)?;
    let mut out = String::new();
    for (i, (record, vector)) in records.iter().zip(vectors.iter()).enumerate() {
        let row = SidecarRow {
            index: i,
            question: record.question.clone(),
            model_id: vector.model_id.clone(),
            vector: vector.values.clone(),
        };
        out.push_str(&serde_json::to_string(&row).expect("sidecar row serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| PoolError::Io { path: path.to_path_buf(), source: e })
}

fn read_sidecar(path: &Path, want: usize) -> Result<Vec<EmbeddingVector>, PoolError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PoolError::Io { path: path.to_path_buf(), source: e })?;
    let mut vectors = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: SidecarRow = serde_json::from_str(line)
            .map_err(|_| PoolError::BadSidecar { path: path.to_path_buf(), line: lineno + 1 })?;
        vectors.push(EmbeddingVector { values: row.vector, model_id: row.model_id });
    }
    if vectors.len() != want {
        return Err(PoolError::SidecarMismatch {
            path: path.to_path_buf(),
            got: vectors.len(),
            want,
        });
    }
    Ok(vectors)
}

/// Loads the pool with embeddings: from the sidecar when present,
/// otherwise by embedding the questions through the gateway.
pub fn load_pool(path: &Path, gateway: &Gateway) -> Result<Vec<FewShotExample>, PoolError> {
    let records = load_pool_records(path)?;
    let sidecar = sidecar_path(path);
    let vectors = if sidecar.exists() {
        read_sidecar(&sidecar, records.len())?
    } else {
        let questions: Vec<String> = records.iter().map(|r| r.question.clone()).collect();
        gateway.embed(&questions).map_err(PoolError::Gateway)?
    };
    Ok(records
        .into_iter()
        .zip(vectors)
        .map(|(r, embedding)| FewShotExample {
            question: r.question,
            transcript: r.transcript,
            embedding,
        })
        .collect())
}

/// The `count` pool items most similar to the query embedding, descending,
/// ties broken by pool order. `count == 0` selects nothing and makes no
/// embedding call.
pub fn select_few_shots(
    query: &str,
    pool: &[FewShotExample],
    count: usize,
    gateway: &Gateway,
) -> Result<Vec<FewShotExample>, GatewayError> {
    if count == 0 || pool.is_empty() {
        return Ok(Vec::new());
    }
    let query_vec = gateway.embed(&[query.to_string()])?.remove(0);
    Ok(rank_by_similarity(&query_vec, pool, count))
}

/// Pure ranking step, split out so fixture embeddings can drive it
/// directly.
pub fn rank_by_similarity(
    query: &EmbeddingVector,
    pool: &[FewShotExample],
    count: usize,
) -> Vec<FewShotExample> {
    let mut scored: Vec<(usize, f64)> = pool
        .iter()
        .enumerate()
        .map(|(i, ex)| (i, query.cosine(&ex.embedding)))
        .collect();
    // Stable sort keeps pool order on ties.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.into_iter().take(count).map(|(i, _)| pool[i].clone()).collect()
}
