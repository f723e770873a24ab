//! Replay the bundled end-to-end cassette: the step agent searches the
//! web once and answers, entirely offline.
//!
//! Run: `cargo run --example react_agent`

use std::path::Path;

use ods::config::{AppConfig, CassetteMode};

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut config =
        AppConfig::from_file(&root.join("tests/fixtures/fixture.conf")).expect("config parses");
    config.cassette_mode = CassetteMode::Replay;
    config.cassette_path = Some(root.join("tests/fixtures/capital_of_france.cassette"));

    let agent = config.build_react_agent().expect("agent builds");
    let result = agent.run("What is the capital of France?").expect("replay run succeeds");

    println!("question: What is the capital of France?");
    for (i, step) in result.trace.history.iter().enumerate() {
        println!("\nstep {}:", i + 1);
        println!("  thought: {}", step.thought);
        println!("  action:  {} ({})", step.action.name(), step.action_input);
        if let Some(obs) = &step.observation {
            let first_line = obs.lines().next().unwrap_or_default();
            println!("  observation: {first_line} ...");
        }
    }
    println!("\nsearches used: {}", result.trace.searches_used);
    println!("terminated by: {:?}", result.terminated_by);
    println!("answer: {}", result.answer().unwrap_or("(none)"));
}
