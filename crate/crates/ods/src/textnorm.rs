//! Short-answer normalization shared by the exact-match grader and the
//! self-consistency answer clusterer, so "most consistent answer" and
//! "correct answer" mean the same thing.

/// Lowercases, removes punctuation, collapses whitespace, and drops
/// leading articles ("a", "an", "the").
///
/// Punctuation is removed rather than replaced, so "2,845" and "2845"
/// normalize identically.
pub fn normalize_answer(s: &str) -> String {
    let lowered = s.to_lowercase();
    let mut cleaned = String::with_capacity(lowered.len());
    for ch in lowered.chars() {
        if ch.is_alphanumeric() {
            cleaned.push(ch);
        } else if ch.is_whitespace() {
            cleaned.push(' ');
        }
    }
    let mut tokens: Vec<&str> = cleaned.split_whitespace().collect();
    while matches!(tokens.first(), Some(&"a") | Some(&"an") | Some(&"the")) {
        tokens.remove(0);
    }
    tokens.join(" ")
}
