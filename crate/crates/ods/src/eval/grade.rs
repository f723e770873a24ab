//! Graders: offline exact match (the CI default) and the judge-model
//! protocol.

use crate::gateway::{CompletionRequest, Gateway, GatewayError, Message};
use crate::textnorm::normalize_answer;

use super::Verdict;

/// Exact match under the shared normalizer. An absent answer was never
/// attempted.
pub fn grade_exact(answer: Option<&str>, gold: &str) -> Verdict {
    match answer {
        None => Verdict::NotAttempted,
        Some(a) => {
            if normalize_answer(a) == normalize_answer(gold) {
                Verdict::Correct
            } else {
                Verdict::Incorrect
            }
        }
    }
}

/// Fixed grading prompt; the judge must answer with a single token.
pub const GRADE_PROMPT: &str = "\
You are grading a question answering system. Given the question, the gold
answer, and the system's answer, respond with exactly one word:
CORRECT if the system answer matches the gold answer in meaning,
INCORRECT if it does not,
NOT_ATTEMPTED if the system did not actually answer.";

/// Judge-model grading. Any output other than the three exact tokens is
/// INCORRECT (fail-closed); provider errors bubble up so the harness can
/// mark the record.
pub fn grade_judge(
    gateway: &Gateway,
    judge_model: Option<&str>,
    question: &str,
    answer: Option<&str>,
    gold: &str,
) -> Result<Verdict, GatewayError> {
    let Some(answer) = answer else {
        return Ok(Verdict::NotAttempted);
    };
    let mut req = CompletionRequest::new(vec![
        Message::system(GRADE_PROMPT),
        Message::user(format!(
            "Question: {question}\nGold answer: {gold}\nSystem answer: {answer}"
        )),
    ])
    .expect("grade prompt has messages")
    .with_max_tokens(8);
    if let Some(model) = judge_model {
        req = req.with_model(model);
    }
    let output = gateway.complete(&req)?;
    Ok(match output.trim() {
        "CORRECT" => Verdict::Correct,
        "NOT_ATTEMPTED" => Verdict::NotAttempted,
        "INCORRECT" => Verdict::Incorrect,
        _ => Verdict::Incorrect,
    })
}
