//! Provider-pluggable search AI stack.
//!
//! The crate wires four layers together:
//!
//! - [`gateway`]: uniform access to completion/embedding providers and raw
//!   HTTP, with record/replay cassettes for deterministic offline runs.
//! - [`search`]: the search pipeline — query rephrasing, SERP retrieval,
//!   page scraping, chunking, and threshold reranking into a prompt-ready
//!   context block.
//! - [`agent`] and [`codeact`]: two reasoning loops over the same tool set —
//!   a tagged step loop (v1) and a script-emitting loop (v2) — both backed
//!   by [`toolbox`] and a self-consistency fallback.
//! - [`eval`]: a benchmark harness that runs an agent over QA datasets and
//!   reports accuracy plus search-count statistics.
//!
//! Most capabilities have a runnable demo under `examples/`; the `ods`
//! binary exposes `ask`, `eval`, and `pool-embed` subcommands.

pub mod agent;
pub mod codeact;
pub mod config;
pub mod eval;
pub mod gateway;
pub mod search;
pub mod textnorm;
pub mod toolbox;
