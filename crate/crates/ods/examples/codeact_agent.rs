//! The script-acting agent with a scripted model: round one issues two
//! searches, round two computes and answers. Shows the per-round logs the
//! model sees.
//!
//! Run: `cargo run --example codeact_agent`

use std::sync::Arc;

use ods::codeact::{BindingTable, CodeActAgent, CodeActConfig};
use ods::gateway::{Gateway, HttpResponse, MockHttp, MockLlm, MockRule};
use ods::search::{SearchConfig, SearchPipeline};
use ods::toolbox::{registry_default, Calculator};

const SERP_URL: &str = "https://serp.demo/search";

fn main() {
    let http = MockHttp::new();
    http.on_body_containing(
        "first flight year",
        HttpResponse::ok(
            r#"{"organic":[{"title":"First flight","link":"https://air.demo/first","snippet":"The first powered flight was in 1903."}]}"#,
        ),
    );
    http.on_body_containing(
        "jet airliner year",
        HttpResponse::ok(
            r#"{"organic":[{"title":"Jet age","link":"https://air.demo/jet","snippet":"The first jet airliner flew in 1949."}]}"#,
        ),
    );
    http.on_url_containing("air.demo", HttpResponse::ok("<p>Aviation history page.</p>"));

    let llm = MockLlm::with_rules(vec![
        MockRule::when(
            &["Round 1"],
            "# the observations carry both years\n\
             gap = calculate(\"1949 - 1903\")\n\
             final_answer(gap + \" years\")",
        ),
        MockRule::when(
            &["Write the next script."],
            "# gather both facts first\n\
             a = search(\"first flight year\")\n\
             b = search(\"jet airliner year\")",
        ),
    ]);

    let gateway = Arc::new(
        Gateway::builder()
            .completion(Arc::new(llm))
            .http(Arc::new(http))
            .build()
            .expect("gateway builds"),
    );
    let config = SearchConfig {
        rephrase_count: 0,
        top_n_snippets: 2,
        pages_to_scrape: 1,
        relevance_threshold: 0.0,
        ..Default::default()
    };
    let pipeline = Arc::new(SearchPipeline::new(gateway.clone(), config).with_serp_endpoint(SERP_URL));
    let tools = registry_default(pipeline, gateway.clone(), Calculator::local_only());

    let agent = CodeActAgent {
        gateway,
        tools,
        bindings: BindingTable::standard(),
        config: CodeActConfig::default(),
    };

    let result = agent
        .run("How many years passed between the first powered flight and the first jet airliner?")
        .expect("run succeeds");

    println!("tool calls:");
    for step in &result.trace.history {
        match &step.observation {
            Some(obs) => {
                let first_line = obs.lines().next().unwrap_or_default();
                println!("  {}({}) -> {first_line}", step.action.name(), step.action_input);
            }
            None => println!("  {}: {}", step.action.name(), step.action_input),
        }
    }
    println!("searches used: {}", result.trace.searches_used);
    println!("answer: {}", result.answer().unwrap_or("(none)"));
}
