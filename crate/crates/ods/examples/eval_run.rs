//! Run the bundled 12-item dataset through the harness in replay mode and
//! print the report: accuracy, per-topic accuracy, mean searches per
//! query, and the search-count histogram.
//!
//! Run: `cargo run --example eval_run`

use std::path::Path;

use ods::config::{AppConfig, CassetteMode};
use ods::eval::{load_dataset, run_eval, EvalOptions, Grader};

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let fixtures = root.join("tests/fixtures");
    let items = load_dataset(&fixtures.join("eval_dataset.jsonl")).expect("dataset loads");

    let mut config =
        AppConfig::from_file(&fixtures.join("fixture.conf")).expect("config parses");
    config.cassette_mode = CassetteMode::Replay;
    config.cassette_path = Some(fixtures.join("eval12.cassette"));
    let agent = config.build_react_agent().expect("agent builds");

    let records = std::env::temp_dir().join("eval_run_demo.jsonl");
    std::fs::remove_file(&records).ok();
    let opts = EvalOptions {
        parallelism: 4,
        records_path: records.clone(),
        config_snapshot: config.snapshot(),
    };
    let report = run_eval(&items, &|item| agent.run(&item.question), &Grader::Exact, &opts)
        .expect("eval runs");

    println!("items:          {}", report.n_items);
    println!("accuracy:       {:.4}", report.accuracy);
    println!("mean searches:  {:.2}", report.mean_searches);
    println!("per topic:");
    for (topic, accuracy) in &report.per_topic {
        println!("  {topic}: {accuracy:.2}");
    }
    println!("search histogram:");
    for (bucket, count) in &report.search_histogram {
        println!("  {bucket:>2}: {count}");
    }
    println!("\nper-item records: {}", records.display());
    std::fs::remove_file(&records).ok();
}
