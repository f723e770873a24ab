//! Deterministic rendering of a search context into a prompt-ready block.
//!
//! Layout: a header carrying the original query, one block per snippet with
//! title, URL, description, and date (or "unknown"), one block per passage
//! with its source URL and score to three decimals, and a fixed trailing
//! instruction telling the model to prefer reliable sources on conflict.

use super::{SearchConfig, SearchContext};

/// Fixed trailing instruction appended to every rendered context.
pub const RELIABILITY_INSTRUCTION: &str = "When sources conflict, prioritize reliable sources \
such as government agencies, educational institutions, and established research institutions.";

/// Pure function: the same context always renders to the same string.
pub fn format_context(ctx: &SearchContext, cfg: &SearchConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("Search results for: {}\n", ctx.query));
    for (i, snippet) in ctx.snippets.iter().take(cfg.top_n_snippets).enumerate() {
        out.push('\n');
        out.push_str(&format!("[{}] Title: {}\n", i + 1, snippet.title));
        out.push_str(&format!("URL: {}\n", snippet.url));
        out.push_str(&format!("Description: {}\n", snippet.description));
        out.push_str(&format!("Date: {}\n", snippet.date.as_deref().unwrap_or("unknown")));
    }
    if !ctx.passages.is_empty() {
        out.push_str("\nRelevant passages:\n");
        for passage in &ctx.passages {
            out.push('\n');
            out.push_str(&format!("(score {:.3}) {}\n", passage.score, passage.source_url));
            out.push_str(&passage.text);
            out.push('\n');
        }
    }
    out.push('\n');
    out.push_str(RELIABILITY_INSTRUCTION);
    out.push('\n');
    out
}
