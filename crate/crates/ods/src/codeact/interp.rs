//! The script interpreter: statements run in order inside an execution
//! environment that owns all state. Tool calls are the only effectful
//! operation, each consumes one budget unit, and every runtime failure
//! becomes an `ERROR: …` string value — execution itself never aborts.

use std::collections::BTreeMap;

use crate::toolbox::{ToolCall, ToolRegistry};

use super::script::{ActionScript, BinOp, BindingTable, Expr, Stmt};

/// A runtime value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Num(f64),
    List(Vec<Value>),
}

impl Value {
    /// Plain rendering: strings bare, integral numbers without a decimal
    /// point, lists bracketed with quoted strings.
    pub fn render(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Num(n) => render_num(*n),
            Value::List(items) => {
                let inner: Vec<String> = items.iter().map(Value::render_quoted).collect();
                format!("[{}]", inner.join(", "))
            }
        }
    }

    fn render_quoted(&self) -> String {
        match self {
            Value::Str(s) => format!("{s:?}"),
            other => other.render(),
        }
    }

    fn is_error(&self) -> bool {
        matches!(self, Value::Str(s) if s.starts_with("ERROR:"))
    }
}

fn render_num(n: f64) -> String {
    if n.is_finite() && n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

/// One executed tool call: the rendered call and its observation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogEntry {
    pub statement: String,
    pub result: String,
}

/// Execution state for one script run. Bindings only grow; the log holds
/// one entry per tool call and never exceeds the step budget.
pub struct ExecEnv<'a> {
    pub bindings: BTreeMap<String, Value>,
    pub step_budget: usize,
    pub tools: &'a ToolRegistry,
    pub bindings_table: &'a BindingTable,
    /// The user's question, passed through to tools.
    pub query: String,
    pub log: Vec<LogEntry>,
}

impl<'a> ExecEnv<'a> {
    pub fn new(
        tools: &'a ToolRegistry,
        bindings_table: &'a BindingTable,
        query: impl Into<String>,
        step_budget: usize,
    ) -> Self {
        ExecEnv {
            bindings: BTreeMap::new(),
            step_budget,
            tools,
            bindings_table,
            query: query.into(),
            log: Vec::new(),
        }
    }
}

/// How one script execution ended.
#[derive(Debug, Clone, PartialEq)]
pub enum ExecOutcome {
    /// `final_answer(…)` ran.
    Final(String),
    /// The script finished (or ran out of budget) without a final answer;
    /// the log goes back to the model as observations.
    Continue { log: Vec<LogEntry>, budget_exhausted: bool },
}

enum EvalStop {
    /// Budget ran out mid-expression.
    Budget,
}

/// Runs the statements in order. Tool errors and runtime type errors bind
/// `ERROR: …` strings and execution continues; only `final_answer` or the
/// end of the script stops it.
pub fn execute_script(script: &ActionScript, env: &mut ExecEnv) -> ExecOutcome {
    for stmt in &script.statements {
        match stmt {
            Stmt::Assign { name, expr, .. } => match eval(expr, env) {
                Ok(value) => {
                    env.bindings.insert(name.clone(), value);
                }
                Err(EvalStop::Budget) => {
                    return ExecOutcome::Continue { log: env.log.clone(), budget_exhausted: true }
                }
            },
            Stmt::Bare { expr, .. } => match eval(expr, env) {
                Ok(_) => {}
                Err(EvalStop::Budget) => {
                    return ExecOutcome::Continue { log: env.log.clone(), budget_exhausted: true }
                }
            },
            Stmt::FinalAnswer { expr, .. } => match eval(expr, env) {
                Ok(value) => return ExecOutcome::Final(value.render()),
                Err(EvalStop::Budget) => {
                    return ExecOutcome::Continue { log: env.log.clone(), budget_exhausted: true }
                }
            },
        }
    }
    ExecOutcome::Continue { log: env.log.clone(), budget_exhausted: false }
}

fn eval(expr: &Expr, env: &mut ExecEnv) -> Result<Value, EvalStop> {
    match expr {
        Expr::Str(s) => Ok(Value::Str(s.clone())),
        Expr::Num(n) => Ok(Value::Num(*n)),
        Expr::Ident(name) => Ok(env
            .bindings
            .get(name)
            .cloned()
            // Parse-time checks make this unreachable via parse_script.
            .unwrap_or_else(|| Value::Str(format!("ERROR: undefined identifier {name}")))),
        Expr::List(items) => {
            let mut values = Vec::with_capacity(items.len());
            for item in items {
                values.push(eval(item, env)?);
            }
            Ok(Value::List(values))
        }
        Expr::Unary(inner) => {
            let value = eval(inner, env)?;
            Ok(match value {
                Value::Num(n) => Value::Num(-n),
                other if other.is_error() => other,
                _ => Value::Str("ERROR: unary minus needs a number".into()),
            })
        }
        Expr::Binary { op, left, right } => {
            let l = eval(left, env)?;
            let r = eval(right, env)?;
            Ok(apply_binop(*op, l, r))
        }
        Expr::ToolCall { name, args } => {
            if env.log.len() >= env.step_budget {
                return Err(EvalStop::Budget);
            }
            let mut rendered_args = Vec::with_capacity(args.len());
            let mut quoted_args = Vec::with_capacity(args.len());
            for arg in args {
                let value = eval(arg, env)?;
                rendered_args.push(value.render());
                quoted_args.push(value.render_quoted());
            }
            let input = rendered_args.join(", ");
            let call_text = format!("{name}({})", quoted_args.join(", "));
            let result_text = match env
                .bindings_table
                .resolve(name)
                .and_then(|registry_name| env.tools.get(registry_name))
            {
                Some(tool) => tool.invoke(ToolCall { input: &input, query: &env.query }).text,
                None => format!("ERROR: unknown tool {name}"),
            };
            env.log.push(LogEntry { statement: call_text, result: result_text.clone() });
            Ok(Value::Str(result_text))
        }
    }
}

fn apply_binop(op: BinOp, l: Value, r: Value) -> Value {
    match op {
        BinOp::Add => match (l, r) {
            (Value::Num(a), Value::Num(b)) => Value::Num(a + b),
            // '+' with a string on either side concatenates.
            (Value::Str(a), b) => Value::Str(format!("{a}{}", b.render())),
            (a, Value::Str(b)) => Value::Str(format!("{}{b}", a.render())),
            _ => Value::Str("ERROR: cannot add lists".into()),
        },
        BinOp::Sub | BinOp::Mul | BinOp::Div => match (l, r) {
            (Value::Num(a), Value::Num(b)) => match op {
                BinOp::Sub => Value::Num(a - b),
                BinOp::Mul => Value::Num(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Value::Str("ERROR: division by zero".into())
                    } else {
                        Value::Num(a / b)
                    }
                }
                BinOp::Add => unreachable!(),
            },
            _ => Value::Str(format!("ERROR: operator needs numbers, not strings or lists")),
        },
    }
}
