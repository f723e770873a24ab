//! Self-consistency fallback: sample several answers, cluster by
//! normalized equality, and pick from the largest cluster with a fixed
//! seed.
//!
//! Run: `cargo run --example self_consistency`

use std::sync::Arc;

use ods::agent::{partition_answers, self_consistency_fallback, ConsistencyConfig};
use ods::gateway::{Gateway, MockLlm};
use ods::search::SearchContext;
use ods::textnorm::normalize_answer;

fn main() {
    let samples = [
        "The sources point to Paris.\nFinal Answer: Paris",
        "Reasoning differs but...\nFinal Answer: paris.",
        "Short path.\nFinal Answer: Paris",
        "A detour.\nFinal Answer: Lyon",
        "Another detour.\nFinal Answer: Lyon",
    ];
    let answers: Vec<String> = samples
        .iter()
        .map(|s| s.lines().last().unwrap().trim_start_matches("Final Answer:").trim().to_string())
        .collect();

    println!("drawn answers: {answers:?}");
    println!("normalized:    {:?}", answers.iter().map(|a| normalize_answer(a)).collect::<Vec<_>>());
    for (i, cluster) in partition_answers(&answers).iter().enumerate() {
        println!("cluster {i}: indices {cluster:?} (size {})", cluster.len());
    }

    let gateway = Gateway::builder()
        .completion(Arc::new(MockLlm::with_queue(samples.to_vec())))
        .build()
        .expect("gateway builds");
    let cfg = ConsistencyConfig { samples: 5, temperature: 0.7, seed: 42 };
    let context = SearchContext::empty("What is the capital of France?");
    let chosen =
        self_consistency_fallback(&gateway, "What is the capital of France?", &context, &cfg)
            .expect("fallback succeeds");
    println!("selected (seed {}): {chosen}", cfg.seed);
}
