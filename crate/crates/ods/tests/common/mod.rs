//! Shared fixture machinery for the integration suites.
//!
//! The bundled cassettes under `tests/fixtures/` are produced by running
//! the real agents against scripted mock providers in record mode; the
//! suites then replay them offline. `fixture.conf` is the single source
//! of truth for every pipeline knob, so recorded digests always match
//! replay digests. Regenerate the bundle with:
//!
//! ```text
//! cargo test -p ods --test acceptance regenerate_fixtures -- --ignored
//! ```

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ods::agent::{AgentResult, ReactAgent};
use ods::codeact::{BindingTable, CodeActAgent};
use ods::config::{AppConfig, CassetteMode};
use ods::gateway::{Gateway, HttpResponse, MockHttp, MockLlm, MockRule};
use ods::toolbox::Calculator;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_config() -> AppConfig {
    AppConfig::from_file(&fixtures_dir().join("fixture.conf")).expect("fixture.conf parses")
}

/// Queries used by the bundled end-to-end cassettes.
pub const CAPITAL_QUERY: &str = "What is the capital of France?";
pub const BAND_QUERY: &str = "What year was the band leader of the group who originally \
performed the song sampled in Kanye West's song Power born?";
pub const WHEELBASE_QUERY: &str = "The Jensen Interceptor (1950), produced from 1950 to 1957, \
had a wheelbase measurement of what in millimeters?";

fn serp_body(entries: &[(&str, &str, &str)]) -> HttpResponse {
    let items: Vec<String> = entries
        .iter()
        .map(|(title, url, snippet)| {
            serde_json::json!({"title": title, "link": url, "snippet": snippet}).to_string()
        })
        .collect();
    HttpResponse::ok(format!(r#"{{"organic":[{}]}}"#, items.join(",")))
}

fn page(text: &str) -> HttpResponse {
    HttpResponse::ok(format!("<html><body><p>{text}</p></body></html>"))
}

fn judge_sufficient() -> MockRule {
    MockRule::when(&["SUFFICIENT or INSUFFICIENT"], "SUFFICIENT")
}

/// A recording agent: scripted mocks behind a record-mode gateway, wired
/// through the shared fixture config.
fn recording_react_agent(llm: MockLlm, http: MockHttp, cassette: &Path) -> ReactAgent {
    let config = fixture_config();
    let gateway = Arc::new(
        Gateway::builder()
            .completion(Arc::new(llm))
            .http(Arc::new(http))
            .record_to(cassette)
            .build()
            .expect("record gateway builds"),
    );
    let pipeline = config.build_pipeline(gateway.clone());
    let tools = config.build_tools(pipeline.clone(), gateway.clone());
    ReactAgent { gateway, pipeline, tools, pool: Vec::new(), config: config.agent }
}

fn recording_codeact_agent(llm: MockLlm, http: MockHttp, cassette: &Path) -> CodeActAgent {
    let config = fixture_config();
    let gateway = Arc::new(
        Gateway::builder()
            .completion(Arc::new(llm))
            .http(Arc::new(http))
            .record_to(cassette)
            .build()
            .expect("record gateway builds"),
    );
    let pipeline = config.build_pipeline(gateway.clone());
    let tools = config.build_tools(pipeline, gateway.clone());
    CodeActAgent {
        gateway,
        tools,
        bindings: BindingTable::standard(),
        config: config.codeact,
    }
}

/// A replaying v1 agent over a bundled cassette.
pub fn replay_react_agent(cassette: &Path) -> ReactAgent {
    let mut config = fixture_config();
    config.cassette_mode = CassetteMode::Replay;
    config.cassette_path = Some(cassette.to_path_buf());
    config.build_react_agent().expect("replay agent builds")
}

/// A replaying v2 agent over a bundled cassette.
pub fn replay_codeact_agent(cassette: &Path) -> CodeActAgent {
    let mut config = fixture_config();
    config.cassette_mode = CassetteMode::Replay;
    config.cassette_path = Some(cassette.to_path_buf());
    config.build_codeact_agent().expect("replay agent builds")
}

pub fn run_react_replay(cassette: &Path, query: &str) -> AgentResult {
    replay_react_agent(cassette).run(query).expect("replay run succeeds")
}

fn record_capital_of_france(dir: &Path) {
    let cassette = dir.join("capital_of_france.cassette");
    std::fs::remove_file(&cassette).ok();
    let http = MockHttp::new();
    http.on_body_containing(
        "capital of France",
        serp_body(&[(
            "France - Factbook",
            "https://facts.fixture/france",
            "The capital of France is Paris.",
        )]),
    );
    http.on_url(
        "https://facts.fixture/france",
        page("The capital of France is Paris. Paris has been the capital city of France for centuries."),
    );
    let llm = MockLlm::with_rules(vec![
        judge_sufficient(),
        MockRule::when(
            &["<Question>"],
            "<Thought> I need to determine the capital city of France. </Thought>\n\
             <Action> search_internet </Action>\n\
             <Action_Input> capital of France </Action_Input>",
        )
        .unless(&["</Observation>"]),
        MockRule::when(
            &["</Observation>"],
            "<Thought> The observation states the capital directly. </Thought>\n\
             <Action> Done </Action>\n\
             <Final_Answer> Paris </Final_Answer>",
        ),
    ]);
    let agent = recording_react_agent(llm, http, &cassette);
    let result = agent.run(CAPITAL_QUERY).expect("recording run succeeds");
    assert_eq!(result.final_answer.as_deref(), Some("Paris"), "recorded answer drifted");
}

fn record_king_crimson(dir: &Path) {
    let cassette = dir.join("king_crimson.cassette");
    std::fs::remove_file(&cassette).ok();
    let http = MockHttp::new();
    // Initial context: background on the song, no band-leader facts.
    http.on_body_containing(
        "band leader of the group",
        serp_body(&[(
            "Power (song)",
            "https://music.fixture/power",
            "Power is a song by Kanye West released in 2010.",
        )]),
    );
    http.on_body_containing(
        "sampled in Kanye West",
        serp_body(&[(
            "Power sample credits",
            "https://music.fixture/power-samples",
            "Power samples 21st Century Schizoid Man by King Crimson, founded by Robert Fripp.",
        )]),
    );
    http.on_body_containing(
        "Robert Fripp birth year",
        serp_body(&[(
            "Robert Fripp",
            "https://music.fixture/fripp",
            "Robert Fripp, the band leader of King Crimson, was born on May 16, 1946.",
        )]),
    );
    http.on_url(
        "https://music.fixture/power",
        page("Power is a song by Kanye West. It heavily samples an older progressive rock track."),
    );
    http.on_url(
        "https://music.fixture/power-samples",
        page("Power samples 21st Century Schizoid Man, originally performed by King Crimson. \
              King Crimson was founded and led by guitarist Robert Fripp."),
    );
    http.on_url(
        "https://music.fixture/fripp",
        page("Robert Fripp, the band leader of King Crimson, was born on May 16, 1946."),
    );
    let llm = MockLlm::with_rules(vec![
        judge_sufficient(),
        MockRule::when(
            &["<Question>"],
            "<Thought> I need to find the song sampled in Power and its original band. </Thought>\n\
             <Action> search_internet </Action>\n\
             <Action_Input> song sampled in Kanye West Power original performer </Action_Input>",
        )
        .unless(&["</Observation>"]),
        MockRule::when(
            &["21st Century Schizoid Man"],
            "<Thought> The original band is King Crimson and its leader is Robert Fripp; \
             I need his birth year. </Thought>\n\
             <Action> search_internet </Action>\n\
             <Action_Input> Robert Fripp birth year </Action_Input>",
        )
        .unless(&["May 16, 1946"]),
        MockRule::when(
            &["May 16, 1946"],
            "<Thought> Robert Fripp was born in 1946, which answers the question. </Thought>\n\
             <Action> Done </Action>\n\
             <Final_Answer> 1946 </Final_Answer>",
        ),
    ]);
    let agent = recording_react_agent(llm, http, &cassette);
    let result = agent.run(BAND_QUERY).expect("recording run succeeds");
    assert_eq!(result.final_answer.as_deref(), Some("1946"), "recorded answer drifted");
    assert_eq!(result.trace.searches_used, 2, "fixture must contain two searches");
}

fn record_unit_conversion(dir: &Path) {
    let cassette = dir.join("unit_conversion.cassette");
    std::fs::remove_file(&cassette).ok();
    let http = MockHttp::new();
    http.on_body_containing(
        "Jensen Interceptor",
        serp_body(&[(
            "Jensen Interceptor (1950)",
            "https://cars.fixture/interceptor",
            "Jensen Interceptor (1950); 4-speed manual, 112 in wheelbase, 183 in length.",
        )]),
    );
    http.on_url(
        "https://cars.fixture/interceptor",
        page("Technical data for the Jensen Interceptor produced 1950 to 1957. \
              Wheelbase: 112 in. Length: 183 in. Width: 66 in."),
    );
    let llm = MockLlm::with_rules(vec![
        judge_sufficient(),
        MockRule::when(
            &["<Question>"],
            "<Thought> The context gives the wheelbase as 112 inches; the question asks for \
             millimeters, so I convert. </Thought>\n\
             <Action> calculate </Action>\n\
             <Action_Input> 112 inches to millimeters </Action_Input>",
        )
        .unless(&["</Observation>"]),
        MockRule::when(
            &["2845 mm"],
            "<Thought> The conversion gives 2845 mm. </Thought>\n\
             <Action> Done </Action>\n\
             <Final_Answer> The wheelbase measurement of the Jensen Interceptor (1950) is \
             2,845 millimeters. </Final_Answer>",
        ),
    ]);
    let agent = recording_react_agent(llm, http, &cassette);
    let result = agent.run(WHEELBASE_QUERY).expect("recording run succeeds");
    assert!(
        result.final_answer.as_deref().unwrap_or("").contains("2,845"),
        "recorded answer drifted"
    );
}

/// The 12-item eval fixture: items 1-9 graded correct, 10 and 11
/// incorrect, 12 not attempted (its first completion has no recording).
/// Searches per item: one each for 1-10, two for 11, zero for 12, so the
/// hand tally is accuracy 9/12 and mean_searches 12/12 = 1.00.
pub fn eval_items_spec() -> Vec<(String, String, String, Option<String>)> {
    // (id, question, gold, topic)
    let mut items = Vec::new();
    for i in 1..=9 {
        items.push((
            format!("q{i:02}"),
            format!("What is recorded fact number {i}?"),
            format!("Answer {i}"),
            Some(if i <= 6 { "alpha".to_string() } else { "beta".to_string() }),
        ));
    }
    items.push((
        "q10".into(),
        "What is recorded fact number 10?".into(),
        "Right ten".into(),
        Some("beta".into()),
    ));
    items.push((
        "q11".into(),
        "What is recorded fact number 11?".into(),
        "Right eleven".into(),
        Some("beta".into()),
    ));
    items.push((
        "q12".into(),
        "What is recorded fact number 12?".into(),
        "Never produced".into(),
        Some("beta".into()),
    ));
    items
}

fn write_eval_dataset(dir: &Path) {
    let mut lines = String::new();
    for (id, question, gold, topic) in eval_items_spec() {
        let mut row = serde_json::json!({"id": id, "question": question, "answer": gold});
        if let Some(topic) = topic {
            row["topic"] = serde_json::Value::String(topic);
        }
        lines.push_str(&row.to_string());
        lines.push('\n');
    }
    std::fs::write(dir.join("eval_dataset.jsonl"), lines).expect("dataset writes");
}

fn record_eval12(dir: &Path) {
    let cassette = dir.join("eval12.cassette");
    std::fs::remove_file(&cassette).ok();
    write_eval_dataset(dir);

    let http = MockHttp::new();
    let mut rules = vec![judge_sufficient()];
    for i in 1..=11 {
        let question_marker = format!("recorded fact number {i}?");
        http.on_body_containing(
            &question_marker,
            serp_body(&[(
                &format!("Fact {i}"),
                &format!("https://data.fixture/item{i}"),
                &format!("Source snippet for fact number {i}."),
            )]),
        );
        http.on_url(
            &format!("https://data.fixture/item{i}"),
            page(&format!("Reference page: fact number {i} marker{i}end.")),
        );
        let answer = match i {
            10 => "Wrong ten".to_string(),
            11 => "Wrong eleven".to_string(),
            n => format!("Answer {n}"),
        };
        if i == 11 {
            // Item 11 searches twice before answering.
            http.on_body_containing(
                "extra lookup eleven",
                serp_body(&[(
                    "Fact 11 follow-up",
                    "https://data.fixture/item11b",
                    // The marker rides in the snippet: snippets always
                    // render, passages only when they pass the threshold.
                    "Second source for fact number 11. secondmarker11end",
                )]),
            );
            http.on_url(
                "https://data.fixture/item11b",
                page("Second reference page: fact number 11 secondmarker11end."),
            );
            rules.push(
                MockRule::when(&[&question_marker],
                    "<Thought> I should search for this fact. </Thought>\n\
                     <Action> search_internet </Action>\n\
                     <Action_Input> What is recorded fact number 11? </Action_Input>")
                .unless(&["</Observation>"]),
            );
            rules.push(
                MockRule::when(&[&question_marker, "marker11end"],
                    "<Thought> I need a second source. </Thought>\n\
                     <Action> search_internet </Action>\n\
                     <Action_Input> extra lookup eleven </Action_Input>")
                .unless(&["secondmarker11end"]),
            );
            rules.push(MockRule::when(
                &[&question_marker, "secondmarker11end"],
                &format!(
                    "<Thought> Both sources agree. </Thought>\n\
                     <Action> Done </Action>\n<Final_Answer> {answer} </Final_Answer>"
                ),
            ));
        } else {
            rules.push(
                MockRule::when(&[&question_marker],
                    &format!(
                        "<Thought> I should search for this fact. </Thought>\n\
                         <Action> search_internet </Action>\n\
                         <Action_Input> What is recorded fact number {i}? </Action_Input>"
                    ))
                .unless(&["</Observation>"]),
            );
            rules.push(MockRule::when(
                &[&question_marker, &format!("marker{i}end")],
                &format!(
                    "<Thought> The source answers it. </Thought>\n\
                     <Action> Done </Action>\n<Final_Answer> {answer} </Final_Answer>"
                ),
            ));
        }
    }
    // Item 12: retrieval is recorded, but no completion rule matches and
    // the queue stays empty, so the first completion fails and replay
    // reproduces the abort as a cassette miss.
    http.on_body_containing(
        "recorded fact number 12?",
        serp_body(&[(
            "Fact 12",
            "https://data.fixture/item12",
            "Source snippet for fact number 12.",
        )]),
    );
    http.on_url(
        "https://data.fixture/item12",
        page("Reference page: fact number 12 marker12end."),
    );

    let agent = recording_react_agent(MockLlm::with_rules(rules), http, &cassette);
    for (_, question, _, _) in eval_items_spec() {
        let _ = agent.run(&question); // item 12 errors by design
    }
}

/// Multi-hop fixture questions shared by the v1 and v2 cassettes.
pub fn multihop_questions() -> Vec<(String, String)> {
    vec![
        ("m1".into(), "Which year links the first hop to the second hop in chain one?".into()),
        ("m2".into(), "Which year links the first hop to the second hop in chain two?".into()),
        ("m3".into(), "Which year links the first hop to the second hop in chain three?".into()),
    ]
}

fn write_multihop_dataset(dir: &Path) {
    let mut lines = String::new();
    for (id, question) in multihop_questions() {
        lines.push_str(
            &serde_json::json!({"id": id, "question": question, "answer": "1950"}).to_string(),
        );
        lines.push('\n');
    }
    std::fs::write(dir.join("multihop_dataset.jsonl"), lines).expect("dataset writes");
}

fn multihop_http() -> MockHttp {
    let http = MockHttp::new();
    for chain in ["one", "two", "three"] {
        http.on_body_containing(
            &format!("chain {chain}?"),
            serp_body(&[(
                &format!("Chain {chain} overview"),
                &format!("https://hops.fixture/{chain}/overview"),
                &format!("Overview of chain {chain}: hop1-{chain} leads onward."),
            )]),
        );
        for hop in 1..=4 {
            http.on_body_containing(
                &format!("hop{hop}-{chain}"),
                serp_body(&[(
                    &format!("Hop {hop} of chain {chain}"),
                    &format!("https://hops.fixture/{chain}/{hop}"),
                    &format!("Detail for hop{hop}-{chain}: continue to hop{}-{chain}.", hop + 1),
                )]),
            );
            http.on_url(
                &format!("https://hops.fixture/{chain}/{hop}"),
                page(&format!("Page for hop{hop}-{chain}. The year is 1950.")),
            );
        }
        http.on_url(
            &format!("https://hops.fixture/{chain}/overview"),
            page(&format!("Overview page for chain {chain}. Start at hop1-{chain}.")),
        );
    }
    http
}

fn record_multihop_v1(dir: &Path) {
    let cassette = dir.join("multihop_v1.cassette");
    std::fs::remove_file(&cassette).ok();
    let mut rules = vec![judge_sufficient()];
    for chain in ["one", "two", "three"] {
        rules.push(
            MockRule::when(&[&format!("chain {chain}?")],
                &format!(
                    "<Thought> One lookup should cover this chain. </Thought>\n\
                     <Action> search_internet </Action>\n\
                     <Action_Input> hop1-{chain} </Action_Input>"
                ))
            .unless(&["</Observation>"]),
        );
        rules.push(MockRule::when(
            &[&format!("chain {chain}?"), "The year is 1950"],
            "<Thought> The year is in the context. </Thought>\n\
             <Action> Done </Action>\n<Final_Answer> 1950 </Final_Answer>",
        ));
    }
    let agent = recording_react_agent(MockLlm::with_rules(rules), multihop_http(), &cassette);
    for (_, question) in multihop_questions() {
        let result = agent.run(&question).expect("recording run succeeds");
        assert_eq!(result.trace.searches_used, 1);
    }
}

fn record_multihop_v2(dir: &Path) {
    let cassette = dir.join("multihop_v2.cassette");
    std::fs::remove_file(&cassette).ok();
    write_multihop_dataset(dir);
    // Scripts per chain: one round of several searches, then the answer.
    // Chains one and three use 3 searches, chain two uses 4.
    let mut rules = Vec::new();
    for (chain, hops) in [("one", 3usize), ("two", 4), ("three", 3)] {
        let script: Vec<String> = (1..=hops)
            .map(|h| format!("h{h} = search(\"hop{h}-{chain}\")"))
            .collect();
        rules.push(
            MockRule::when(&["Write the next script.", &format!("chain {chain}?")],
                &script.join("\n"))
            .unless(&["Round 1"]),
        );
        rules.push(MockRule::when(
            &["Round 1", &format!("chain {chain}?")],
            "final_answer(\"1950\")",
        ));
    }
    let agent = recording_codeact_agent(MockLlm::with_rules(rules), multihop_http(), &cassette);
    for ((_, question), expected) in multihop_questions().iter().zip([3usize, 4, 3]) {
        let result = agent.run(question).expect("recording run succeeds");
        assert_eq!(result.trace.searches_used, expected);
        assert_eq!(result.final_answer.as_deref(), Some("1950"));
    }
}

/// Rebuilds every bundled fixture in the source tree.
pub fn regenerate_all_fixtures() {
    let dir = fixtures_dir();
    std::fs::create_dir_all(&dir).expect("fixtures dir");
    record_capital_of_france(&dir);
    record_king_crimson(&dir);
    record_unit_conversion(&dir);
    record_eval12(&dir);
    record_multihop_v1(&dir);
    record_multihop_v2(&dir);
}

/// A local calculator for suites that need one.
pub fn calculator() -> Calculator {
    Calculator::local_only()
}
