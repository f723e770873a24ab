//! Self-consistency fallback: draw several completions, cluster the
//! extracted answers by normalized equality, and pick a seeded-random
//! member of the largest cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gateway::{CompletionRequest, Gateway, Message};
use crate::search::SearchContext;
use crate::textnorm::normalize_answer;

/// Sampling knobs for the fallback.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    /// Number of completions drawn.
    pub samples: usize,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig { samples: 5, temperature: 0.7, seed: 0 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FallbackError {
    #[error("every fallback sample failed")]
    Exhausted,
}

const CONSISTENCY_SYSTEM_PROMPT: &str = "\
Answer the question using the provided context. Think step by step, then
end your reply with exactly one line of the form:
Final Answer: <short answer>";

/// Pulls the final answer out of one sampled completion: a
/// `<Final_Answer>` tag if present, else the last `Final Answer:` line,
/// else the last non-empty line.
pub fn extract_final_answer(sample: &str) -> String {
    if let Ok(step) = super::step::parse_step(sample) {
        if step.action == super::step::AgentAction::Done && !step.action_input.is_empty() {
            return step.action_input;
        }
    }
    let mut last_nonempty = "";
    let mut tagged: Option<&str> = None;
    for line in sample.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        last_nonempty = trimmed;
        let lower = trimmed.to_ascii_lowercase();
        if let Some(pos) = lower.find("final answer:") {
            tagged = Some(trimmed[pos + "final answer:".len()..].trim());
        }
    }
    tagged.unwrap_or(last_nonempty).to_string()
}

/// Partitions sample indices into clusters of normalized-equal answers,
/// in order of first appearance.
pub fn partition_answers(samples: &[String]) -> Vec<Vec<usize>> {
    let mut keys: Vec<String> = Vec::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, sample) in samples.iter().enumerate() {
        let key = normalize_answer(sample);
        match keys.iter().position(|k| *k == key) {
            Some(pos) => clusters[pos].push(i),
            None => {
                keys.push(key);
                clusters.push(vec![i]);
            }
        }
    }
    clusters
}

/// The winning cluster: maximal size, ties resolved toward the cluster
/// containing the earliest-drawn sample.
pub fn largest_cluster(samples: &[String]) -> Vec<usize> {
    let clusters = partition_answers(samples);
    clusters
        .into_iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .unwrap_or_default()
}

/// Draws `cfg.samples` completions, clusters their final answers, and
/// returns a seeded uniform-random member of the largest cluster.
/// Provider failures skip that draw; if every draw fails the fallback is
/// exhausted.
pub fn self_consistency_fallback(
    gateway: &Gateway,
    query: &str,
    context: &SearchContext,
    cfg: &ConsistencyConfig,
) -> Result<String, FallbackError> {
    let req = CompletionRequest::new(vec![
        Message::system(CONSISTENCY_SYSTEM_PROMPT),
        Message::user(format!("{}\n<Question>\n{}\n</Question>", context.rendered, query)),
    ])
    .expect("prompt always has messages")
    .with_temperature(cfg.temperature)
    .with_max_tokens(1024);

    // Draws are ordered by index; clustering sees them in draw order.
    let mut answers: Vec<String> = Vec::new();
    for _ in 0..cfg.samples.max(1) {
        if let Ok(text) = gateway.complete(&req) {
            answers.push(extract_final_answer(&text));
        }
    }
    if answers.is_empty() {
        return Err(FallbackError::Exhausted);
    }
    let winners = largest_cluster(&answers);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pick = winners[rng.gen_range(0..winners.len())];
    Ok(answers[pick].clone())
}
