//! Tool implementations behind the agents' action names.

pub mod calc;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::gateway::{CompletionRequest, Gateway, Message};
use crate::search::SearchPipeline;

pub use calc::{convert_units, evaluate_arithmetic, render_rational, CalcError, Calculator, RemoteMath};

/// Tool invocation context: the input plus what the agent knows.
#[derive(Debug, Clone, Copy)]
pub struct ToolCall<'a> {
    pub input: &'a str,
    /// The user's original question.
    pub query: &'a str,
}

/// A tool's observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolResult {
    pub text: String,
    pub is_error: bool,
    pub metadata: BTreeMap<String, String>,
}

impl ToolResult {
    pub fn ok(text: impl Into<String>, route: &str) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("route".to_string(), route.to_string());
        ToolResult { text: text.into(), is_error: false, metadata }
    }

    /// `text` must already start with `ERROR:`.
    pub fn error(text: impl Into<String>, route: &str) -> Self {
        let text = text.into();
        debug_assert!(text.starts_with("ERROR:"));
        let mut metadata = BTreeMap::new();
        metadata.insert("route".to_string(), route.to_string());
        ToolResult { text, is_error: true, metadata }
    }
}

type ToolFn = dyn Fn(ToolCall) -> ToolResult + Send + Sync;

/// A named capability.
#[derive(Clone)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    invoke: Arc<ToolFn>,
}

impl ToolSpec {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        invoke: impl Fn(ToolCall) -> ToolResult + Send + Sync + 'static,
    ) -> Self {
        ToolSpec { name: name.into(), description: description.into(), invoke: Arc::new(invoke) }
    }

    pub fn invoke(&self, call: ToolCall) -> ToolResult {
        (self.invoke)(call)
    }
}

/// Immutable name -> tool map.
#[derive(Clone, Default)]
pub struct ToolRegistry {
    tools: BTreeMap<String, ToolSpec>,
}

impl ToolRegistry {
    pub fn from_specs(specs: Vec<ToolSpec>) -> Self {
        let mut tools = BTreeMap::new();
        for spec in specs {
            let prior = tools.insert(spec.name.clone(), spec);
            assert!(prior.is_none(), "duplicate tool name in registry");
        }
        ToolRegistry { tools }
    }

    pub fn get(&self, name: &str) -> Option<&ToolSpec> {
        self.tools.get(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.tools.keys().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }
}

const CONTINUE_THINK_PROMPT: &str = "Break the problem below into smaller steps and reason \
through what is known so far. Do not call tools; think in plain text.";

/// The default registry: `search_internet` backed by the search pipeline,
/// `calculate` backed by the calculator, and `continue_think` backed by a
/// single decomposition completion.
pub fn registry_default(
    pipeline: Arc<SearchPipeline>,
    gateway: Arc<Gateway>,
    calculator: Calculator,
) -> ToolRegistry {
    let search = ToolSpec::new(
        "search_internet",
        "Search the web and return a ranked, formatted evidence context",
        move |call: ToolCall| match pipeline.build_context(call.input) {
            Ok(ctx) => ToolResult::ok(ctx.rendered, "search"),
            Err(e) => ToolResult::error(format!("ERROR: {e}"), "search"),
        },
    );
    let calculate = ToolSpec::new(
        "calculate",
        "Evaluate arithmetic or convert units",
        move |call: ToolCall| calculator.calculate(call.input),
    );
    let think = ToolSpec::new(
        "continue_think",
        "Decompose the problem further with one extra reasoning pass",
        move |call: ToolCall| {
            let prompt = format!(
                "{CONTINUE_THINK_PROMPT}\n\nQuestion: {}\nFocus: {}",
                call.query, call.input
            );
            let req = CompletionRequest::new(vec![Message::user(prompt)])
                .expect("static prompt is non-empty")
                .with_max_tokens(512);
            match gateway.complete(&req) {
                Ok(text) => ToolResult::ok(text, "llm"),
                Err(e) => ToolResult::error(format!("ERROR: {e}"), "llm"),
            }
        },
    );
    ToolRegistry::from_specs(vec![search, calculate, think])
}
