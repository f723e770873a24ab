//! Dynamic few-shot selection over the bundled 20-example pool: embed the
//! query, rank the pool by cosine similarity, keep the top five.
//!
//! Run: `cargo run --example few_shot_selection`

use std::path::Path;
use std::sync::Arc;

use ods::agent::{load_pool, select_few_shots};
use ods::gateway::{Gateway, MockEmbeddings};

fn main() {
    let pool_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/few_shot_pool.txt");
    // Deterministic hashed embeddings keep the demo offline; live runs
    // plug in an embedding provider instead.
    let gateway = Gateway::builder()
        .embeddings(Arc::new(MockEmbeddings::hashed(64)))
        .build()
        .expect("gateway builds");

    let pool = load_pool(&pool_path, &gateway).expect("pool loads");
    println!("pool: {} worked examples", pool.len());

    let query = "Which tennis player has won the most major titles, and how many?";
    let picked = select_few_shots(query, &pool, 5, &gateway).expect("selection succeeds");

    println!("query: {query}\n");
    println!("top 5 by cosine similarity:");
    for (i, example) in picked.iter().enumerate() {
        let score = gateway
            .embed(&[query.to_string()])
            .unwrap()
            .remove(0)
            .cosine(&example.embedding);
        println!("  {}. ({score:+.3}) {}", i + 1, example.question);
    }
}
