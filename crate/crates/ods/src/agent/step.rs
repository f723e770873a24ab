//! The tagged step grammar: parsing model output into a structured step
//! and rendering steps back into history text.
//!
//! A step is `<Thought>…</Thought><Action>…</Action><Action_Input>…
//! </Action_Input>`, optionally followed by `<Observation>…</Observation>`
//! once the tool has run. A terminal step carries
//! `<Final_Answer>…</Final_Answer>` instead of an input. Tag names match
//! case-insensitively. The parser is total: any text yields either a step
//! or a named error, never a panic.

use serde::{Deserialize, Serialize};

/// The agent's action options, plus the terminal marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentAction {
    SearchInternet,
    Calculate,
    ContinueThink,
    Done,
}

impl AgentAction {
    pub fn name(&self) -> &'static str {
        match self {
            AgentAction::SearchInternet => "search_internet",
            AgentAction::Calculate => "calculate",
            AgentAction::ContinueThink => "continue_think",
            AgentAction::Done => "Done",
        }
    }

    fn parse(name: &str) -> Option<AgentAction> {
        match name.trim().to_lowercase().as_str() {
            "search_internet" => Some(AgentAction::SearchInternet),
            "calculate" => Some(AgentAction::Calculate),
            "continue_think" => Some(AgentAction::ContinueThink),
            "done" => Some(AgentAction::Done),
            _ => None,
        }
    }
}

/// One reasoning step. For `Done` steps the final answer rides in
/// `action_input` and `observation` is always absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub thought: String,
    pub action: AgentAction,
    pub action_input: String,
    pub observation: Option<String>,
}

impl AgentStep {
    pub fn done(thought: impl Into<String>, answer: impl Into<String>) -> Self {
        AgentStep {
            thought: thought.into(),
            action: AgentAction::Done,
            action_input: answer.into(),
            observation: None,
        }
    }
}

/// Parse failures, each naming the violated grammar rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("missing <Thought> block")]
    MissingThought,
    #[error("unknown action name: {0}")]
    UnknownAction(String),
    #[error("missing <Action_Input> for action {0}")]
    MissingInput(String),
    #[error("unclosed tag <{0}>")]
    UnclosedTag(String),
    #[error("no <Action> or <Final_Answer> tag found")]
    MissingAction,
}

/// Finds the first `<tag>…</tag>` span (case-insensitive) at or after
/// `from`, returning (payload, open index, index just past the close tag).
fn find_tag(text: &str, tag: &str, from: usize) -> Result<Option<(String, usize, usize)>, ParseError> {
    // ASCII-only folding keeps byte offsets aligned with `text`.
    let lower = text.to_ascii_lowercase();
    let open = format!("<{}>", tag.to_ascii_lowercase());
    let close = format!("</{}>", tag.to_ascii_lowercase());
    let Some(rel) = lower[from..].find(&open) else {
        return Ok(None);
    };
    let start = from + rel;
    let payload_start = start + open.len();
    match lower[payload_start..].find(&close) {
        Some(rel_close) => {
            let payload_end = payload_start + rel_close;
            Ok(Some((
                text[payload_start..payload_end].trim().to_string(),
                start,
                payload_end + close.len(),
            )))
        }
        None => Err(ParseError::UnclosedTag(tag.to_string())),
    }
}

/// Extracts the first well-formed step from raw model output.
pub fn parse_step(output: &str) -> Result<AgentStep, ParseError> {
    let thought = find_tag(output, "Thought", 0)?;
    let action = find_tag(output, "Action", 0)?;
    let final_answer = find_tag(output, "Final_Answer", 0)?;

    // A terminal may appear with or without an explicit <Action> Done.
    if let Some((answer, ..)) = &final_answer {
        let action_ok = match &action {
            None => true,
            Some((name, ..)) => AgentAction::parse(name) == Some(AgentAction::Done),
        };
        if action_ok {
            let thought_text = thought.map(|(t, ..)| t).unwrap_or_default();
            return Ok(AgentStep::done(thought_text, answer.clone()));
        }
    }

    let Some((action_name, action_open, action_end)) = action else {
        return Err(ParseError::MissingAction);
    };
    let Some(action) = AgentAction::parse(&action_name) else {
        return Err(ParseError::UnknownAction(action_name));
    };
    let Some((thought_text, thought_open, _)) = thought else {
        return Err(ParseError::MissingThought);
    };
    if thought_open > action_open {
        // The first step in the stream must lead with its thought.
        return Err(ParseError::MissingThought);
    }

    if action == AgentAction::Done {
        // Done without a Final_Answer tag: treat the (possibly absent)
        // input as the answer payload.
        let input = find_tag(output, "Action_Input", action_end)?
            .map(|(i, ..)| i)
            .unwrap_or_default();
        return Ok(AgentStep::done(thought_text, input));
    }

    let input = find_tag(output, "Action_Input", action_end)?;
    let input_text = input.map(|(i, ..)| i).unwrap_or_default();
    if input_text.is_empty() && action != AgentAction::ContinueThink {
        return Err(ParseError::MissingInput(action.name().to_string()));
    }
    let observation = find_tag(output, "Observation", action_end)?.map(|(o, ..)| o);
    Ok(AgentStep { thought: thought_text, action, action_input: input_text, observation })
}

/// Renders a step in the exact shape the parser accepts.
pub fn render_step(step: &AgentStep) -> String {
    let mut out = String::new();
    out.push_str(&format!("<Thought> {} </Thought>\n", step.thought));
    if step.action == AgentAction::Done {
        out.push_str("<Action> Done </Action>\n");
        out.push_str(&format!("<Final_Answer> {} </Final_Answer>\n", step.action_input));
        return out;
    }
    out.push_str(&format!("<Action> {} </Action>\n", step.action.name()));
    out.push_str(&format!("<Action_Input> {} </Action_Input>\n", step.action_input));
    if let Some(obs) = &step.observation {
        out.push_str(&format!("<Observation> {} </Observation>\n", obs));
    }
    out
}

/// Splits a full tagged transcript (a `<Question>…` block followed by
/// steps) into the question and its parsed steps. Used to validate
/// few-shot pool records.
pub fn parse_transcript(transcript: &str) -> Result<(String, Vec<AgentStep>), ParseError> {
    let (question, _, mut cursor) = find_tag(transcript, "Question", 0)?
        .ok_or(ParseError::MissingAction)?;
    let mut steps = Vec::new();
    loop {
        let rest = &transcript[cursor..];
        if rest.trim().is_empty() {
            break;
        }
        // Stop once no further tags open a step.
        let has_action = find_tag(rest, "Action", 0)?.is_some();
        let has_final = find_tag(rest, "Final_Answer", 0)?.is_some();
        if !has_action && !has_final {
            break;
        }
        let step = parse_step(rest)?;
        let consumed = step_end(rest, &step)?;
        steps.push(step);
        cursor += consumed;
    }
    if steps.is_empty() {
        return Err(ParseError::MissingAction);
    }
    Ok((question, steps))
}

/// Index just past the last tag belonging to `step` within `text`.
fn step_end(text: &str, step: &AgentStep) -> Result<usize, ParseError> {
    let tag = if step.action == AgentAction::Done {
        "Final_Answer"
    } else if step.observation.is_some() {
        "Observation"
    } else {
        "Action_Input"
    };
    // Walk forward from the step's action tag.
    if let Some((_, _, end)) = find_tag(text, tag, 0)? {
        return Ok(end);
    }
    // Done steps may omit every tag except Final_Answer; Action_Input may
    // be absent for continue_think.
    if let Some((_, _, end)) = find_tag(text, "Action", 0)? {
        return Ok(end);
    }
    Err(ParseError::MissingAction)
}
