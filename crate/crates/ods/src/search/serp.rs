//! SERP client: POST `{q, num}`, response `{organic: [{title, link,
//! snippet, date?}]}`.

use serde::Deserialize;

use crate::gateway::{Gateway, HttpRequestSpec};

use super::{SearchError, SerpResult};

#[derive(Deserialize)]
struct SerpResponse {
    #[serde(default)]
    organic: Vec<SerpOrganic>,
}

#[derive(Deserialize)]
struct SerpOrganic {
    #[serde(default)]
    title: String,
    #[serde(default)]
    link: String,
    #[serde(default)]
    snippet: String,
    #[serde(default)]
    date: Option<String>,
}

/// Fetches up to `num` organic results for `query`. An empty organic list
/// is an empty result, not an error.
pub fn serp_fetch(
    gateway: &Gateway,
    base_url: &str,
    api_key_env: &str,
    query: &str,
    num: usize,
) -> Result<Vec<SerpResult>, SearchError> {
    if query.trim().is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    let body = serde_json::json!({"q": query, "num": num}).to_string();
    let mut req =
        HttpRequestSpec::post(base_url, body).with_header("Content-Type", "application/json");
    if let Ok(key) = std::env::var(api_key_env) {
        req = req.with_header("X-API-KEY", key);
    }
    let resp = gateway.http(&req).map_err(SearchError::Gateway)?;
    if resp.status >= 400 {
        return Err(SearchError::SerpStatus(resp.status));
    }
    let parsed: SerpResponse = serde_json::from_slice(&resp.body)
        .map_err(|e| SearchError::SerpFormat(e.to_string()))?;
    let mut results = Vec::new();
    for organic in parsed.organic.into_iter().take(num) {
        // Skip entries without an absolute URL; ranks stay contiguous.
        if !organic.link.starts_with("http://") && !organic.link.starts_with("https://") {
            continue;
        }
        results.push(SerpResult {
            title: organic.title,
            url: organic.link,
            description: organic.snippet,
            date: organic.date,
            rank: results.len() + 1,
            source_query: query.to_string(),
        });
    }
    Ok(results)
}
