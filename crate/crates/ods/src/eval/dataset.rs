//! Dataset loading: line-delimited JSON records
//! `{id, question, answer, topic?}`, parsed strictly.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{EvalError, EvalItem};

#[derive(Deserialize)]
struct RawItem {
    id: String,
    question: String,
    answer: String,
    #[serde(default)]
    topic: Option<String>,
}

/// Loads a dataset file. Duplicate ids and malformed lines are errors,
/// with the offending line number.
pub fn load_dataset(path: &Path) -> Result<Vec<EvalItem>, EvalError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| EvalError::Io { path: PathBuf::from(path), source: e })?;
    let mut items: Vec<EvalItem> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawItem = serde_json::from_str(line).map_err(|e| EvalError::Parse {
            path: PathBuf::from(path),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if raw.question.trim().is_empty() || raw.answer.trim().is_empty() {
            return Err(EvalError::Parse {
                path: PathBuf::from(path),
                line: lineno + 1,
                message: "question and answer must be non-empty".into(),
            });
        }
        if items.iter().any(|it| it.id == raw.id) {
            return Err(EvalError::DuplicateId { id: raw.id, line: lineno + 1 });
        }
        items.push(EvalItem {
            id: raw.id,
            question: raw.question,
            gold_answer: raw.answer,
            topic: raw.topic,
        });
    }
    Ok(items)
}

/// Deterministic subsample: a seeded shuffle of the loaded order, then the
/// first `count` items.
pub fn sample_items(items: Vec<EvalItem>, count: usize, seed: u64) -> Vec<EvalItem> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut items = items;
    items.shuffle(&mut rng);
    items.truncate(count);
    items
}
