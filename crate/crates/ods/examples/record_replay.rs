//! Record a session to a cassette, then replay it with no providers
//! attached: same requests, byte-identical responses, zero network.
//!
//! Run: `cargo run --example record_replay`

use std::sync::Arc;

use ods::gateway::{CompletionRequest, Gateway, Message, MockLlm};

fn main() {
    let cassette = std::env::temp_dir().join("record_replay_demo.cassette");
    std::fs::remove_file(&cassette).ok();

    let req = CompletionRequest::new(vec![
        Message::system("Answer in one word."),
        Message::user("What is the capital of France?"),
    ])
    .expect("request builds");
    println!("request digest: {}", req.digest());

    // Record: the scripted provider answers and every exchange lands in
    // the cassette. The same request twice shows duplicate ordering.
    let recorded = {
        let gateway = Gateway::builder()
            .completion(Arc::new(MockLlm::with_queue(vec!["Paris", "Paris (still)"])))
            .record_to(&cassette)
            .build()
            .expect("record gateway builds");
        let first = gateway.complete(&req).expect("first call");
        let second = gateway.complete(&req).expect("second call");
        (first, second)
    };
    println!("recorded: {:?}", recorded);
    println!("cassette:\n{}", std::fs::read_to_string(&cassette).unwrap());

    // Replay: no provider is attached, so a miss would be the only
    // possible failure. Duplicates come back in recorded order.
    let gateway = Gateway::replay(&cassette).expect("replay gateway builds");
    let first = gateway.complete(&req).expect("replayed first");
    let second = gateway.complete(&req).expect("replayed second");
    assert_eq!((first.as_str(), second.as_str()), ("Paris", "Paris (still)"));
    println!("replayed: ({first:?}, {second:?})");

    let miss = gateway.complete(&req).unwrap_err();
    println!("third call (nothing left to replay): {miss}");

    std::fs::remove_file(&cassette).ok();
}
