//! Cassettes: ordered request/response records for deterministic replay.
//!
//! File format is line-delimited UTF-8, one record per line:
//!
//! ```text
//! kind TAB digest TAB base64(body)
//! ```
//!
//! `kind` is `completion`, `embedding`, or `http`. Replay consumes records
//! by digest; duplicate digests replay in recorded order, since an agent
//! may legitimately repeat the same call within one run.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

use super::GatewayError;

/// Kind tag of a cassette record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    Completion,
    Embedding,
    Http,
}

impl RecordKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordKind::Completion => "completion",
            RecordKind::Embedding => "embedding",
            RecordKind::Http => "http",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "completion" => Some(RecordKind::Completion),
            "embedding" => Some(RecordKind::Embedding),
            "http" => Some(RecordKind::Http),
            _ => None,
        }
    }
}

/// One recorded exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct CassetteEntry {
    pub kind: RecordKind,
    pub digest: String,
    pub body: Vec<u8>,
}

/// An in-memory cassette: ordered entries plus load/save.
#[derive(Debug, Default, Clone)]
pub struct Cassette {
    pub entries: Vec<CassetteEntry>,
}

impl Cassette {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let mut file = File::open(path).map_err(|e| GatewayError::CassetteIo {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(|e| GatewayError::CassetteIo {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let kind = parts
                .next()
                .and_then(RecordKind::parse)
                .ok_or_else(|| GatewayError::CassetteFormat {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                })?;
            let digest = parts
                .next()
                .ok_or_else(|| GatewayError::CassetteFormat {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                })?
                .to_string();
            let body = parts
                .next()
                .and_then(|b64| BASE64.decode(b64.trim_end()).ok())
                .ok_or_else(|| GatewayError::CassetteFormat {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                })?;
            entries.push(CassetteEntry { kind, digest, body });
        }
        Ok(Cassette { entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), GatewayError> {
        let mut file = File::create(path).map_err(|e| GatewayError::CassetteIo {
            path: path.to_path_buf(),
            source: e,
        })?;
        for entry in &self.entries {
            writeln!(
                file,
                "{}\t{}\t{}",
                entry.kind.as_str(),
                entry.digest,
                BASE64.encode(&entry.body)
            )
            .map_err(|e| GatewayError::CassetteIo { path: path.to_path_buf(), source: e })?;
        }
        Ok(())
    }
}

/// Append-only recorder; one serialized writer per file.
pub struct Recorder {
    path: PathBuf,
    writer: Mutex<BufWriter<File>>,
}

impl Recorder {
    pub fn create(path: &Path) -> Result<Self, GatewayError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GatewayError::CassetteIo { path: path.to_path_buf(), source: e })?;
        Ok(Recorder { path: path.to_path_buf(), writer: Mutex::new(BufWriter::new(file)) })
    }

    pub fn append(&self, kind: RecordKind, digest: &str, body: &[u8]) -> Result<(), GatewayError> {
        let mut w = self.writer.lock().expect("recorder lock poisoned");
        writeln!(w, "{}\t{}\t{}", kind.as_str(), digest, BASE64.encode(body))
            .and_then(|_| w.flush())
            .map_err(|e| GatewayError::CassetteIo { path: self.path.clone(), source: e })
    }
}

/// Replay store: digest -> FIFO queue of recorded bodies.
pub struct ReplayStore {
    queues: Mutex<HashMap<(RecordKind, String), VecDeque<Vec<u8>>>>,
}

impl ReplayStore {
    pub fn from_cassette(cassette: Cassette) -> Self {
        let mut queues: HashMap<(RecordKind, String), VecDeque<Vec<u8>>> = HashMap::new();
        for entry in cassette.entries {
            queues.entry((entry.kind, entry.digest)).or_default().push_back(entry.body);
        }
        ReplayStore { queues: Mutex::new(queues) }
    }

    /// Pops the next recorded body for `digest`, in recorded order.
    pub fn take(&self, kind: RecordKind, digest: &str) -> Option<Vec<u8>> {
        let mut queues = self.queues.lock().expect("replay lock poisoned");
        let queue = queues.get_mut(&(kind, digest.to_string()))?;
        let body = queue.pop_front();
        if queue.is_empty() {
            queues.remove(&(kind, digest.to_string()));
        }
        body
    }
}
