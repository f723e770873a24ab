//! Benchmark harness: run an agent over a QA dataset, grade the answers,
//! and report accuracy plus search-count statistics.

pub mod dataset;
pub mod grade;

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentError, AgentResult, Termination};
use crate::gateway::Gateway;

pub use dataset::{load_dataset, sample_items};
pub use grade::{grade_exact, grade_judge, GRADE_PROMPT};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at {path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("duplicate id `{id}` at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("records file {path} is corrupt at line {line}")]
    RecordsCorrupt { path: PathBuf, line: usize },
    #[error("dataset is empty")]
    EmptyDataset,
}

/// One benchmark question.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    pub question: String,
    pub gold_answer: String,
    pub topic: Option<String>,
}

/// Grading outcome for one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
    NotAttempted,
}

/// One graded item. `verdict == NotAttempted` exactly when `model_answer`
/// is absent; the constructor enforces it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub item_id: String,
    pub model_answer: Option<String>,
    pub verdict: Verdict,
    pub searches_used: usize,
    pub latency_ms: u64,
    pub terminated_by: Option<Termination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EvalRecord {
    pub fn new(
        item_id: String,
        model_answer: Option<String>,
        verdict: Verdict,
        searches_used: usize,
        latency_ms: u64,
        terminated_by: Option<Termination>,
        error: Option<String>,
    ) -> Self {
        // Keep the verdict/answer pairing coherent in both directions.
        let (model_answer, verdict) = match (model_answer, verdict) {
            (_, Verdict::NotAttempted) | (None, _) => (None, Verdict::NotAttempted),
            (answer, v) => (answer, v),
        };
        EvalRecord { item_id, model_answer, verdict, searches_used, latency_ms, terminated_by, error }
    }
}

/// Aggregate statistics for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub accuracy: f64,
    pub per_topic: BTreeMap<String, f64>,
    pub mean_searches: f64,
    pub search_histogram: BTreeMap<String, usize>,
    pub n_items: usize,
    pub config: serde_json::Value,
}

/// How answers are graded.
pub enum Grader<'a> {
    Exact,
    Judge { gateway: &'a Gateway, model: Option<String> },
}

impl Grader<'_> {
    /// Grades one answer. The error slot carries judge provider failures;
    /// the harness marks such records not-attempted.
    fn grade(&self, item: &EvalItem, answer: Option<&str>) -> (Verdict, Option<String>) {
        match self {
            Grader::Exact => (grade_exact(answer, &item.gold_answer), None),
            Grader::Judge { gateway, model } => {
                match grade_judge(gateway, model.as_deref(), &item.question, answer, &item.gold_answer)
                {
                    Ok(verdict) => (verdict, None),
                    Err(e) => (Verdict::NotAttempted, Some(format!("judge failed: {e}"))),
                }
            }
        }
    }
}

/// Harness options.
pub struct EvalOptions {
    pub parallelism: usize,
    pub records_path: PathBuf,
    /// Echoed into the report for reproducibility.
    pub config_snapshot: serde_json::Value,
}

/// Runs every dataset item through the agent, streaming records to the
/// records file as they complete. Items already present in the records
/// file are skipped, so an interrupted run resumes by id. Per-item agent
/// failures become not-attempted records and never abort the run.
pub fn run_eval(
    items: &[EvalItem],
    run_item: &(dyn Fn(&EvalItem) -> Result<AgentResult, AgentError> + Sync),
    grader: &Grader,
    opts: &EvalOptions,
) -> Result<RunReport, EvalError> {
    if items.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let mut records = load_records(&opts.records_path)?;
    records.retain(|r| items.iter().any(|it| it.id == r.item_id));

    let pending: Vec<&EvalItem> = items
        .iter()
        .filter(|it| !records.iter().any(|r| r.item_id == it.id))
        .collect();

    if !pending.is_empty() {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&opts.records_path)
            .map_err(|e| EvalError::Io { path: opts.records_path.clone(), source: e })?;
        let writer = Mutex::new(file);
        let next: Mutex<usize> = Mutex::new(0);
        let fresh: Mutex<Vec<EvalRecord>> = Mutex::new(Vec::new());
        let io_error: Mutex<Option<std::io::Error>> = Mutex::new(None);

        let width = opts.parallelism.max(1).min(pending.len());
        std::thread::scope(|scope| {
            for _ in 0..width {
                scope.spawn(|| loop {
                    let index = {
                        let mut guard = next.lock().expect("eval queue");
                        if *guard >= pending.len() {
                            break;
                        }
                        let i = *guard;
                        *guard += 1;
                        i
                    };
                    let record = evaluate_one(pending[index], run_item, grader);
                    let line = serde_json::to_string(&record).expect("record serializes");
                    {
                        let mut w = writer.lock().expect("records writer");
                        if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                            io_error.lock().expect("io error slot").get_or_insert(e);
                            break;
                        }
                    }
                    fresh.lock().expect("fresh records").push(record);
                });
            }
        });
        if let Some(e) = io_error.into_inner().expect("io error slot") {
            return Err(EvalError::Io { path: opts.records_path.clone(), source: e });
        }
        records.extend(fresh.into_inner().expect("fresh records"));
    }

    records.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    Ok(aggregate(items, &records, opts.config_snapshot.clone()))
}

fn evaluate_one(
    item: &EvalItem,
    run_item: &(dyn Fn(&EvalItem) -> Result<AgentResult, AgentError> + Sync),
    grader: &Grader,
) -> EvalRecord {
    let started = Instant::now();
    match run_item(item) {
        Ok(result) => {
            let answer = result.answer().map(str::to_string);
            let (verdict, grade_error) = grader.grade(item, answer.as_deref());
            let answer = if verdict == Verdict::NotAttempted { None } else { answer };
            EvalRecord::new(
                item.id.clone(),
                answer,
                verdict,
                result.trace.searches_used,
                started.elapsed().as_millis() as u64,
                Some(result.terminated_by),
                grade_error,
            )
        }
        Err(e) => EvalRecord::new(
            item.id.clone(),
            None,
            Verdict::NotAttempted,
            0,
            started.elapsed().as_millis() as u64,
            None,
            Some(format!("agent failed: {e}")),
        ),
    }
}

fn load_records(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| EvalError::Io { path: path.to_path_buf(), source: e })?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(line)
            .map_err(|_| EvalError::RecordsCorrupt { path: path.to_path_buf(), line: lineno + 1 })?;
        // First record per id wins; later duplicates (e.g. from a
        // re-appended resume) are ignored.
        if !records.iter().any(|r: &EvalRecord| r.item_id == record.item_id) {
            records.push(record);
        }
    }
    Ok(records)
}

const HISTOGRAM_BUCKETS: [&str; 6] = ["0", "1", "2", "3", "4", "5+"];

fn aggregate(items: &[EvalItem], records: &[EvalRecord], config: serde_json::Value) -> RunReport {
    let n = items.len();
    let correct = records.iter().filter(|r| r.verdict == Verdict::Correct).count();

    let mut histogram: BTreeMap<String, usize> =
        HISTOGRAM_BUCKETS.iter().map(|b| (b.to_string(), 0)).collect();
    let mut total_searches = 0usize;
    for record in records {
        total_searches += record.searches_used;
        let bucket = if record.searches_used >= 5 {
            "5+".to_string()
        } else {
            record.searches_used.to_string()
        };
        *histogram.get_mut(&bucket).expect("bucket exists") += 1;
    }

    let mut per_topic: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for item in items {
        let Some(topic) = &item.topic else { continue };
        let entry = per_topic.entry(topic.clone()).or_insert((0, 0));
        entry.1 += 1;
        let graded_correct = records
            .iter()
            .any(|r| r.item_id == item.id && r.verdict == Verdict::Correct);
        if graded_correct {
            entry.0 += 1;
        }
    }

    RunReport {
        accuracy: correct as f64 / n as f64,
        per_topic: per_topic
            .into_iter()
            .map(|(topic, (c, t))| (topic, c as f64 / t as f64))
            .collect(),
        mean_searches: total_searches as f64 / n as f64,
        search_histogram: histogram,
        n_items: n,
        config,
    }
}
