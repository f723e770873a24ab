//! Build a search context offline: scripted SERP results and pages go
//! through rephrasing, retrieval, scraping, chunking, and reranking, and
//! the rendered evidence block is printed.
//!
//! Run: `cargo run --example search_context`

use std::sync::Arc;

use ods::gateway::{Gateway, HttpResponse, MockHttp, MockLlm};
use ods::search::{SearchConfig, SearchPipeline};

const SERP_URL: &str = "https://serp.demo/search";

fn organic(entries: &[(&str, &str, &str, Option<&str>)]) -> HttpResponse {
    let items: Vec<String> = entries
        .iter()
        .map(|(title, url, snippet, date)| {
            let mut v = serde_json::json!({"title": title, "link": url, "snippet": snippet});
            if let Some(date) = date {
                v["date"] = serde_json::Value::String(date.to_string());
            }
            v.to_string()
        })
        .collect();
    HttpResponse::ok(format!(r#"{{"organic":[{}]}}"#, items.join(",")))
}

fn main() {
    let http = MockHttp::new();
    // The original query and its rephrasing return overlapping results;
    // the pipeline dedupes by URL and keeps the best rank.
    http.on_body_containing(
        "make my Internet faster",
        organic(&[
            ("Router placement guide", "https://network.demo/placement", "Where to put the router for a stronger signal.", Some("Apr 9, 2024")),
            ("ISP plans compared", "https://network.demo/plans", "Bandwidth tiers and what they mean.", None),
        ]),
    );
    http.on_body_containing(
        "Wi-Fi signal stronger",
        organic(&[
            ("Router placement guide", "https://network.demo/placement", "Where to put the router for a stronger signal.", Some("Apr 9, 2024")),
            ("Mesh network basics", "https://network.demo/mesh", "Extending coverage with mesh nodes.", None),
        ]),
    );
    http.on_url(
        "https://network.demo/placement",
        HttpResponse::ok(
            "<html><body><p>Place the router centrally and away from walls. \
             A stronger signal usually means faster Internet in practice.</p>\
             <script>analytics()</script></body></html>",
        ),
    );
    http.on_url(
        "https://network.demo/plans",
        HttpResponse::ok(
            "<html><body><p>Faster Internet often just needs a bandwidth upgrade; \
             check what your plan allows before buying hardware.</p></body></html>",
        ),
    );

    // The rephraser is a scripted model here; live runs use a provider.
    let llm = MockLlm::with_queue(vec!["1. How to make the Wi-Fi signal stronger"]);

    let gateway = Arc::new(
        Gateway::builder()
            .completion(Arc::new(llm))
            .http(Arc::new(http))
            .build()
            .expect("gateway builds"),
    );
    let config = SearchConfig {
        rephrase_count: 1,
        top_n_snippets: 4,
        pages_to_scrape: 2,
        passages_per_page: 2,
        relevance_threshold: 0.15,
        ..Default::default()
    };
    let pipeline = SearchPipeline::new(gateway, config).with_serp_endpoint(SERP_URL);

    let ctx = pipeline.build_context("how to make my Internet faster").expect("context builds");

    println!("rephrasings: {:?}", ctx.rephrasings);
    println!(
        "snippets: {} (unique URLs), passages: {}",
        ctx.snippets.len(),
        ctx.passages.len()
    );
    println!("---\n{}", ctx.rendered);
}
