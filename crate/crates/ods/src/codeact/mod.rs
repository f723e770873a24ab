//! The script-acting agent loop (v2): the model emits an action script,
//! the sandboxed interpreter runs it against the tool registry, and the
//! execution log feeds the next round until a script calls
//! `final_answer` or the round budget runs out.

pub mod interp;
pub mod script;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agent::{
    self_consistency_fallback, AgentAction, AgentError, AgentResult, AgentState, AgentStep,
    ConsistencyConfig, FallbackError, Termination,
};
use crate::gateway::{CompletionRequest, Gateway, Message};
use crate::search::SearchContext;
use crate::toolbox::ToolRegistry;

pub use interp::{execute_script, ExecEnv, ExecOutcome, LogEntry, Value};
pub use script::{parse_script, ActionScript, BindingTable, ScriptError, Stmt};

/// System instruction: the script grammar and the tool signatures.
pub const CODEACT_SYSTEM_PROMPT: &str = "\
You are an agent that acts by writing a short script, one statement per line.

Statements:
  name = expression
  final_answer(expression)

Expressions: double-quoted strings, numbers, lists like [\"a\", 1],
identifiers you defined earlier, + - * /, and tool calls:
  search(\"query\")          -> web search, returns a formatted evidence context
  search_internet(\"query\") -> same as search
  calculate(\"expression\")  -> arithmetic or a unit conversion, returns the result
  continue_think(\"topic\")  -> one extra reasoning pass from the model

'+' joins strings. '#' starts a comment. Define a variable before using it.
Emit only the script, no prose. End with final_answer(...) once you know the
answer; otherwise end the script after your tool calls and their results will
come back next round.";

/// Runtime knobs for the script loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeActConfig {
    pub max_rounds: usize,
    /// Tool calls allowed per round.
    pub step_budget: usize,
    pub consistency: ConsistencyConfig,
}

impl Default for CodeActConfig {
    fn default() -> Self {
        CodeActConfig { max_rounds: 6, step_budget: 10, consistency: ConsistencyConfig::default() }
    }
}

struct Round {
    source: String,
    entries: Vec<LogEntry>,
    budget_exhausted: bool,
    parse_error: Option<String>,
}

/// The v2 agent.
pub struct CodeActAgent {
    pub gateway: Arc<Gateway>,
    pub tools: ToolRegistry,
    pub bindings: BindingTable,
    pub config: CodeActConfig,
}

impl CodeActAgent {
    /// Runs the round loop. Parse failures become that round's log and the
    /// loop continues; exhausted rounds hand over to the self-consistency
    /// fallback. Search accounting matches the step agent: one history
    /// step per tool call, so `searches_used` counts script searches.
    pub fn run(&self, query: &str) -> Result<AgentResult, AgentError> {
        if query.trim().is_empty() {
            return Err(AgentError::EmptyQuery);
        }
        let mut state = AgentState::new(query, SearchContext::empty(query));
        let mut rounds: Vec<Round> = Vec::new();
        let mut first_completion = true;

        for _ in 0..self.config.max_rounds {
            let req = self.round_prompt(query, &rounds);
            let source = match self.gateway.complete(&req) {
                Ok(s) => s,
                Err(e) if first_completion => return Err(AgentError::FirstCompletion(e)),
                Err(_) => break,
            };
            first_completion = false;

            match parse_script(&source, &self.bindings) {
                Ok(parsed) => {
                    let mut env = interp::ExecEnv::new(
                        &self.tools,
                        &self.bindings,
                        query,
                        self.config.step_budget,
                    );
                    let outcome = execute_script(&parsed, &mut env);
                    self.record_steps(&mut state, &env.log);
                    match outcome {
                        ExecOutcome::Final(answer) => {
                            state.push_step(AgentStep::done(String::new(), answer.clone()));
                            return Ok(AgentResult {
                                final_answer: Some(answer),
                                trace: state,
                                terminated_by: Termination::FinalAnswer,
                                fallback_answer: None,
                            });
                        }
                        ExecOutcome::Continue { log, budget_exhausted } => {
                            rounds.push(Round {
                                source,
                                entries: log,
                                budget_exhausted,
                                parse_error: None,
                            });
                        }
                    }
                }
                Err(e) => {
                    rounds.push(Round {
                        source,
                        entries: Vec::new(),
                        budget_exhausted: false,
                        parse_error: Some(e.to_string()),
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

    fn round_prompt(&self, query: &str, rounds: &[Round]) -> CompletionRequest {
        let mut user = format!("<Question>\n{query}\n</Question>\n");
        for (i, round) in rounds.iter().enumerate() {
            user.push_str(&format!("\n--- Round {} script ---\n{}\n", i + 1, round.source.trim()));
            user.push_str(&format!("--- Round {} results ---\n", i + 1));
            if let Some(err) = &round.parse_error {
                user.push_str(&format!("ERROR: script did not parse: {err}\n"));
            } else if round.entries.is_empty() {
                user.push_str("(no tool calls)\n");
            } else {
                for entry in &round.entries {
                    user.push_str(&format!("{} => {}\n", entry.statement, entry.result));
                }
            }
            if round.budget_exhausted {
                user.push_str("(tool budget for the round was exhausted)\n");
            }
        }
        user.push_str("\nWrite the next script.");
        CompletionRequest::new(vec![
            Message::system(CODEACT_SYSTEM_PROMPT),
            Message::user(user),
        ])
        .expect("prompt always has messages")
        .with_max_tokens(512)
    }

    /// Mirrors tool calls into the shared trace shape: one step per call,
    /// so search counting works exactly as in the step agent.
    fn record_steps(&self, state: &mut AgentState, log: &[LogEntry]) {
        for entry in log {
            let name = entry.statement.split('(').next().unwrap_or_default();
            let action = match self.bindings.resolve(name) {
                Some("search_internet") => AgentAction::SearchInternet,
                Some("calculate") => AgentAction::Calculate,
                _ => AgentAction::ContinueThink,
            };
            let input = entry
                .statement
                .find('(')
                .map(|open| entry.statement[open + 1..entry.statement.len() - 1].to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| entry.statement.clone());
            state.push_step(AgentStep {
                thought: String::new(),
                action,
                action_input: input,
                observation: Some(entry.result.clone()),
            });
        }
    }
}
