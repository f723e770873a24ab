//! Fixed prompt texts and the step-loop prompt builder.

use crate::gateway::{CompletionRequest, Message};

use super::fewshot::FewShotExample;
use super::step::render_step;
use super::AgentState;

/// System instruction for the step loop: the tag grammar, the available
/// actions, and the stop condition.
pub const REACT_SYSTEM_PROMPT: &str = "\
You are a question answering agent that reasons in explicit tagged steps.

Reply with exactly one step in this format:
<Thought> your reasoning about the current state </Thought>
<Action> one of: search_internet, calculate, continue_think, Done </Action>
<Action_Input> the input for the action </Action_Input>

Actions:
- search_internet: search the web; the input is a search query.
- calculate: evaluate arithmetic or a unit conversion; the input is the expression.
- continue_think: break the problem into smaller steps; the input says what to decompose.
- Done: no further tools are needed.

After each action the result appears in an <Observation> block. Never write
an <Observation> yourself. When you know the answer, finish with:
<Action> Done </Action>
<Final_Answer> the short final answer </Final_Answer>";

/// Fixed judging prompt; the model must answer with a single token.
pub const JUDGE_PROMPT: &str = "\
You are a strict judge of answer quality. Given a question and a proposed
answer, decide whether the answer actually answers the question with a
concrete, specific response. Respond with exactly one word:
SUFFICIENT or INSUFFICIENT.";

/// Builds the completion request for the next step: system instruction,
/// then few-shot transcripts, the rendered search context, the question,
/// and the tagged history.
pub fn build_react_prompt(state: &AgentState, shots: &[FewShotExample]) -> CompletionRequest {
    build_react_prompt_with_note(state, shots, None)
}

/// Same as [`build_react_prompt`] with an optional corrective observation
/// appended (used for the one retry after a malformed step).
pub(crate) fn build_react_prompt_with_note(
    state: &AgentState,
    shots: &[FewShotExample],
    note: Option<&str>,
) -> CompletionRequest {
    let mut user = String::new();
    for shot in shots {
        user.push_str(&shot.transcript);
        user.push_str("\n\n");
    }
    user.push_str(&state.context.rendered);
    user.push_str(&format!("\n<Question>\n{}\n</Question>\n\n", state.query));
    for step in &state.history {
        user.push_str(&render_step(step));
    }
    if let Some(note) = note {
        user.push_str(&format!("<Observation> {note} </Observation>\n"));
    }
    CompletionRequest::new(vec![
        Message::system(REACT_SYSTEM_PROMPT),
        Message::user(user),
    ])
    .expect("prompt always has messages")
    .with_max_tokens(1024)
    .with_stop(vec!["<Observation>".into(), "</Observation>".into()])
}
