//! The step-loop reasoning agent: structured Thought/Action steps over
//! tools, dynamic few-shot selection, and a judge-gated self-consistency
//! fallback.

pub mod consistency;
pub mod fewshot;
pub mod prompt;
pub mod step;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gateway::{CompletionRequest, Gateway, GatewayError, Message};
use crate::search::{SearchContext, SearchPipeline};
use crate::toolbox::{ToolCall, ToolRegistry};

pub use consistency::{
    extract_final_answer, largest_cluster, partition_answers, self_consistency_fallback,
    ConsistencyConfig, FallbackError,
};
pub use fewshot::{
    load_pool, load_pool_records, rank_by_similarity, select_few_shots, sidecar_path,
    write_sidecar, FewShotExample, PoolError, PoolRecord,
};
pub use prompt::{build_react_prompt, JUDGE_PROMPT, REACT_SYSTEM_PROMPT};
pub use step::{parse_step, parse_transcript, render_step, AgentAction, AgentStep, ParseError};

/// The loop's evolving state: the question, the evidence context, and the
/// ordered step history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentState {
    pub query: String,
    pub context: SearchContext,
    pub history: Vec<AgentStep>,
    pub step_index: usize,
    pub searches_used: usize,
}

impl AgentState {
    pub fn new(query: impl Into<String>, context: SearchContext) -> Self {
        AgentState {
            query: query.into(),
            context,
            history: Vec::new(),
            step_index: 0,
            searches_used: 0,
        }
    }

    /// Appends a step, keeping `step_index` and `searches_used` in sync
    /// with the history.
    pub fn push_step(&mut self, step: AgentStep) {
        if step.action == AgentAction::SearchInternet {
            self.searches_used += 1;
        }
        self.history.push(step);
        self.step_index = self.history.len();
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    FinalAnswer,
    Fallback,
    StepBudget,
}

/// The outcome of one run: at most one of `final_answer` /
/// `fallback_answer` is populated; neither is only possible when the
/// budget ran out and the fallback was exhausted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentResult {
    pub final_answer: Option<String>,
    pub trace: AgentState,
    pub terminated_by: Termination,
    pub fallback_answer: Option<String>,
}

impl AgentResult {
    /// Whichever answer the run produced.
    pub fn answer(&self) -> Option<&str> {
        self.final_answer.as_deref().or(self.fallback_answer.as_deref())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("query must be non-empty")]
    EmptyQuery,
    #[error("first completion failed: {0}")]
    FirstCompletion(GatewayError),
}

/// Judge verdict over a candidate answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgement {
    Sufficient,
    Insufficient,
}

/// Runtime knobs for the step loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    pub max_steps: usize,
    /// Few-shot examples selected per run; 0 skips selection entirely.
    pub few_shot_count: usize,
    pub consistency: ConsistencyConfig,
    /// Optional model override for judge calls.
    pub judge_model: Option<String>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            max_steps: 8,
            few_shot_count: 5,
            consistency: ConsistencyConfig::default(),
            judge_model: None,
        }
    }
}

/// The v1 reasoning agent.
pub struct ReactAgent {
    pub gateway: Arc<Gateway>,
    pub pipeline: Arc<SearchPipeline>,
    pub tools: ToolRegistry,
    pub pool: Vec<FewShotExample>,
    pub config: AgentConfig,
}

impl ReactAgent {
    /// Runs the loop: build the evidence context once up front, then
    /// prompt → parse → dispatch until a judged-sufficient answer, the
    /// step budget, or a provider failure hands control to the
    /// self-consistency fallback. Only a failure of the very first
    /// completion aborts the run.
    pub fn run(&self, query: &str) -> Result<AgentResult, AgentError> {
        if query.trim().is_empty() {
            return Err(AgentError::EmptyQuery);
        }
        // Retrieval degradation is not fatal; the loop can still search.
        let context = self
            .pipeline
            .build_context(query)
            .unwrap_or_else(|_| SearchContext::empty(query));
        let shots = if self.config.few_shot_count == 0 || self.pool.is_empty() {
            Vec::new()
        } else {
            select_few_shots(query, &self.pool, self.config.few_shot_count, &self.gateway)
                .unwrap_or_default()
        };

        let mut state = AgentState::new(query, context);
        let mut first_completion = true;
        let mut retry_note: Option<String> = None;

        while state.step_index < self.config.max_steps {
            let req = prompt::build_react_prompt_with_note(&state, &shots, retry_note.as_deref());
            let output = match self.gateway.complete(&req) {
                Ok(o) => o,
                Err(e) if first_completion => return Err(AgentError::FirstCompletion(e)),
                Err(_) => break,
            };
            first_completion = false;
            match parse_step(&output) {
                Ok(step) => {
                    retry_note = None;
                    if step.action == AgentAction::Done {
                        let answer = step.action_input.clone();
                        state.push_step(step);
                        if self.judge_answer(query, &answer) == Judgement::Sufficient {
                            return Ok(AgentResult {
                                final_answer: Some(answer),
                                trace: state,
                                terminated_by: Termination::FinalAnswer,
                                fallback_answer: None,
                            });
                        }
                        break;
                    }
                    let observation = self.dispatch_action(&step, &state);
                    let mut step = step;
                    step.observation = Some(observation);
                    state.push_step(step);
                }
                Err(e) => {
                    if retry_note.is_none() {
                        // One corrective retry that does not consume a step.
                        retry_note = Some(format!(
                            "ERROR: your last output was malformed ({e}). Reply with exactly \
                             one step: <Thought> reasoning </Thought> <Action> search_internet \
                             | calculate | continue_think | Done </Action> <Action_Input> input \
                             </Action_Input>, or finish with <Final_Answer> answer </Final_Answer>."
                        ));
                        continue;
                    }
                    retry_note = None;
                    state.push_step(AgentStep {
                        thought: String::new(),
                        action: AgentAction::ContinueThink,
                        action_input: String::new(),
                        observation: Some(format!("ERROR: unparseable model output ({e})")),
                    });
                }
            }
        }

        match self_consistency_fallback(
            &self.gateway,
            query,
            &state.context,
            &self.config.consistency,
        ) {
            Ok(answer) => Ok(AgentResult {
                final_answer: None,
                trace: state,
                terminated_by: Termination::Fallback,
                fallback_answer: Some(answer),
            }),
            Err(FallbackError::Exhausted) => Ok(AgentResult {
                final_answer: None,
                trace: state,
                terminated_by: Termination::StepBudget,
                fallback_answer: None,
            }),
        }
    }

    /// Executes a non-terminal step's action and returns the observation.
    /// Tool failures render into the observation as `ERROR: …` so the
    /// loop always continues.
    pub fn dispatch_action(&self, step: &AgentStep, state: &AgentState) -> String {
        debug_assert!(step.action != AgentAction::Done);
        let name = step.action.name();
        match self.tools.get(name) {
            Some(tool) => {
                tool.invoke(ToolCall { input: &step.action_input, query: &state.query }).text
            }
            None => format!("ERROR: unknown tool {name}"),
        }
    }

    /// One completion against the fixed judging prompt. Empty answers are
    /// insufficient without a model call; anything but the exact token
    /// SUFFICIENT (including provider errors) is insufficient.
    pub fn judge_answer(&self, query: &str, answer: &str) -> Judgement {
        if answer.trim().is_empty() {
            return Judgement::Insufficient;
        }
        let mut req = CompletionRequest::new(vec![
            Message::system(JUDGE_PROMPT.to_string()),
            Message::user(format!("Question: {query}\nProposed answer: {answer}")),
        ])
        .expect("judge prompt has messages")
        .with_max_tokens(8);
        if let Some(model) = &self.config.judge_model {
            req = req.with_model(model.clone());
        }
        match self.gateway.complete(&req) {
            Ok(text) if text.trim() == "SUFFICIENT" => Judgement::Sufficient,
            _ => Judgement::Insufficient,
        }
    }
}
