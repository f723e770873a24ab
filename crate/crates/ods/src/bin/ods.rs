//! Thin command-line front end: `ask` runs one query through an agent,
//! `eval` runs a dataset through the harness, `pool-embed` precomputes
//! few-shot embeddings. All behavior lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ods::agent::Termination;
use ods::config::{AgentVersion, AppConfig, CassetteMode, ConfigError};
use ods::eval::{load_dataset, run_eval, sample_items, EvalOptions, Grader};

#[derive(Parser)]
#[command(name = "ods", version, about = "Provider-pluggable search AI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonFlags {
    /// Flat key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Agent version: v1 (step loop) or v2 (script loop).
    #[arg(long)]
    agent: Option<String>,
    /// Replay this cassette; no network traffic happens.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Record provider traffic to this cassette.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Override any config key, e.g. --set search.rephrase_count=0.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one query and print the answer.
    Ask {
        query: String,
        #[command(flatten)]
        common: CommonFlags,
        /// Write the full run trace (JSON) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a dataset through the harness and write a report.
    Eval {
        #[command(flatten)]
        common: CommonFlags,
        /// Line-delimited JSON dataset {id, question, answer, topic?}.
        #[arg(long)]
        dataset: PathBuf,
        /// Grader: exact (offline) or judge (needs an LLM provider).
        #[arg(long, default_value = "exact")]
        grader: String,
        /// Evaluate a deterministic subsample of this size.
        #[arg(long)]
        sample: Option<usize>,
        /// Seed for --sample.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
        /// Per-item records file (crash-resumable by id).
        #[arg(long, default_value = "records.jsonl")]
        records: PathBuf,
        /// Report output file (JSON).
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Precompute few-shot pool embeddings into a sidecar file.
    PoolEmbed {
        #[command(flatten)]
        common: CommonFlags,
        /// Pool file of tagged transcripts.
        #[arg(long)]
        pool: PathBuf,
        /// Sidecar output path (default: <pool>.emb).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Ask { query, common, trace } => cmd_ask(&query, &common, trace.as_deref()),
        Command::Eval { common, dataset, grader, sample, seed, parallelism, records, report } => {
            cmd_eval(&common, &dataset, &grader, sample, seed, parallelism, &records, &report)
        }
        Command::PoolEmbed { common, pool, out } => cmd_pool_embed(&common, &pool, out),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Layers config sources: file, then --set overrides, then dedicated
/// flags.
fn effective_config(common: &CommonFlags) -> Result<AppConfig, ConfigError> {
    let mut config = match &common.config {
        Some(path) => AppConfig::from_file(path)?,
        None => AppConfig::default(),
    };
    for (i, pair) in common.set.iter().enumerate() {
        let (key, value) = pair
            .split_once('=')
            .ok_or(ConfigError::BadLine { line: i + 1 })?;
        config.apply(key.trim(), value.trim(), i + 1)?;
    }
    if let Some(agent) = &common.agent {
        config.agent_version = AgentVersion::parse(agent)
            .ok_or_else(|| ConfigError::BadValue { key: "agent.version".into(), value: agent.clone() })?;
    }
    if let Some(path) = &common.replay {
        config.cassette_mode = CassetteMode::Replay;
        config.cassette_path = Some(path.clone());
    } else if let Some(path) = &common.record {
        config.cassette_mode = CassetteMode::Record;
        config.cassette_path = Some(path.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run_agent(
    config: &AppConfig,
    query: &str,
) -> Result<ods::agent::AgentResult, Box<dyn std::error::Error>> {
    match config.agent_version {
        AgentVersion::V1 => Ok(config.build_react_agent()?.run(query)?),
        AgentVersion::V2 => Ok(config.build_codeact_agent()?.run(query)?),
    }
}

fn cmd_ask(
    query: &str,
    common: &CommonFlags,
    trace: Option<&std::path::Path>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config = effective_config(common)?;
    let result = run_agent(&config, query)?;
    if let Some(path) = trace {
        let doc = serde_json::json!({
            "agent": config.agent_version.as_str(),
            "config": config.snapshot(),
            "result": result,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    match result.answer() {
        Some(answer) => {
            println!("{answer}");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            debug_assert_eq!(result.terminated_by, Termination::StepBudget);
            eprintln!("no answer: step budget exhausted and fallback failed");
            Ok(ExitCode::from(2))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    common: &CommonFlags,
    dataset: &std::path::Path,
    grader_name: &str,
    sample: Option<usize>,
    seed: u64,
    parallelism: usize,
    records: &std::path::Path,
    report_path: &std::path::Path,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config = effective_config(common)?;

    // Fail fast before any item runs: the judge grader needs a usable
    // completion route.
    if grader_name == "judge"
        && config.cassette_mode != CassetteMode::Replay
        && config.llm.provider != "mock"
        && std::env::var(&config.llm.key_env).is_err()
    {
        return Err(Box::new(ConfigError::Invalid(format!(
            "grader `judge` needs {} set (or replay mode)",
            config.llm.key_env
        ))));
    }
    if grader_name != "judge" && grader_name != "exact" {
        return Err(Box::new(ConfigError::BadValue {
            key: "grader".into(),
            value: grader_name.into(),
        }));
    }

    let mut items = load_dataset(dataset)?;
    if let Some(count) = sample {
        items = sample_items(items, count, seed);
    }

    // One gateway serves the agent and the judge so a single cassette
    // covers the whole run.
    let report = match config.agent_version {
        AgentVersion::V1 => {
            let agent = config.build_react_agent()?;
            let grader = match grader_name {
                "judge" => Grader::Judge {
                    gateway: &agent.gateway,
                    model: config.agent.judge_model.clone(),
                },
                _ => Grader::Exact,
            };
            let opts = EvalOptions {
                parallelism,
                records_path: records.to_path_buf(),
                config_snapshot: config.snapshot(),
            };
            run_eval(&items, &|item| agent.run(&item.question), &grader, &opts)?
        }
        AgentVersion::V2 => {
            let agent = config.build_codeact_agent()?;
            let grader = match grader_name {
                "judge" => Grader::Judge {
                    gateway: &agent.gateway,
                    model: config.agent.judge_model.clone(),
                },
                _ => Grader::Exact,
            };
            let opts = EvalOptions {
                parallelism,
                records_path: records.to_path_buf(),
                config_snapshot: config.snapshot(),
            };
            run_eval(&items, &|item| agent.run(&item.question), &grader, &opts)?
        }
    };

    std::fs::write(report_path, serde_json::to_string_pretty(&report)?)?;
    println!(
        "accuracy={:.4} mean_searches={:.2} n={}",
        report.accuracy, report.mean_searches, report.n_items
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_pool_embed(
    common: &CommonFlags,
    pool: &std::path::Path,
    out: Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config = effective_config(common)?;
    let records = ods::agent::load_pool_records(pool)?;
    let gateway = config.build_gateway()?;
    let out = out.unwrap_or_else(|| ods::agent::sidecar_path(pool));
    ods::agent::write_sidecar(&records, &gateway, &out)?;
    println!("embedded {} examples -> {}", records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}
