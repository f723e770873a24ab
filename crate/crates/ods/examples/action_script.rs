//! The action-script language on its own: parse, static checks, and
//! sandboxed execution against the tool registry.
//!
//! Run: `cargo run --example action_script`

use std::sync::Arc;

use ods::codeact::{execute_script, parse_script, BindingTable, ExecEnv, ExecOutcome};
use ods::gateway::Gateway;
use ods::search::{SearchConfig, SearchPipeline};
use ods::toolbox::{registry_default, Calculator};

fn main() {
    let table = BindingTable::standard();
    let gateway = Arc::new(Gateway::builder().build().expect("gateway builds"));
    let pipeline = Arc::new(SearchPipeline::new(gateway.clone(), SearchConfig::default()));
    let tools = registry_default(pipeline, gateway, Calculator::local_only());

    let source = r#"
# gather and combine
age = calculate("2014 - 1924")
label = "age: " + age + " years"
parts = [age, label]
final_answer(label)
"#;
    println!("script:{source}");

    let script = parse_script(source, &table).expect("script parses");
    println!("parsed {} statements", script.statements.len());

    let mut env = ExecEnv::new(&tools, &table, "demo question", 10);
    match execute_script(&script, &mut env) {
        ExecOutcome::Final(answer) => println!("final answer: {answer}"),
        ExecOutcome::Continue { log, budget_exhausted } => {
            println!("no final answer (budget exhausted: {budget_exhausted})");
            for entry in log {
                println!("  {} => {}", entry.statement, entry.result);
            }
        }
    }
    println!("tool-call log:");
    for entry in &env.log {
        println!("  {} => {}", entry.statement, entry.result);
    }

    // Static checks reject what the sandbox must never run.
    for bad in ["y = z + 1", "x = run_shell(\"ls\")", "x = = 3"] {
        match parse_script(bad, &table) {
            Err(e) => println!("rejected {bad:?}: {e}"),
            Ok(_) => unreachable!("{bad} must not parse"),
        }
    }
}
