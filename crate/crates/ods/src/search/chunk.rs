//! Character-based document chunking with overlap.
//!
//! Offsets are character positions (not bytes), so spans are stable across
//! providers and encodings. Chunks stride by `chunk_size - overlap`, every
//! chunk is at most `chunk_size` characters, and the final chunk always
//! ends at the end of the text.

/// A chunk of a document plus its `[start, end)` character span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub text: String,
    pub span: (usize, usize),
}

/// Splits `text` into overlapping chunks. Empty text yields no chunks.
///
/// Panics if `overlap >= chunk_size`; the config layer validates this
/// before any document reaches the pipeline.
pub fn chunk_document(text: &str, chunk_size: usize, overlap: usize) -> Vec<Chunk> {
    assert!(chunk_size > 0, "chunk_size must be positive");
    assert!(overlap < chunk_size, "overlap must be smaller than chunk_size");
    let chars: Vec<char> = text.chars().collect();
    let total = chars.len();
    if total == 0 {
        return Vec::new();
    }
    let stride = chunk_size - overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + chunk_size).min(total);
        chunks.push(Chunk { text: chars[start..end].iter().collect(), span: (start, end) });
        if end == total {
            break;
        }
        start += stride;
    }
    chunks
}

/// The `[start, end)` character slice of `text`.
pub fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end.saturating_sub(start)).collect()
}
