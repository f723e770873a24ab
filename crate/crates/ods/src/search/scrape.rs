//! Page scraping with per-site handlers.
//!
//! Hosts on the encyclopedia/preprint/biomedical lists are fetched through
//! their structured plain-text APIs; every other URL is fetched as HTML and
//! stripped of tags, scripts, and styles. Which route was taken is kept on
//! the result so callers (and tests) can observe it.

use url::Url;

use crate::gateway::{Gateway, GatewayError, HttpRequestSpec};

use super::SearchError;

/// Handler host lists; a host matches when it equals a listed domain or is
/// a subdomain of one.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SiteHandlers {
    pub encyclopedia: Vec<String>,
    pub preprint: Vec<String>,
    pub biomedical: Vec<String>,
}

impl Default for SiteHandlers {
    fn default() -> Self {
        SiteHandlers {
            encyclopedia: vec!["wikipedia.org".into()],
            preprint: vec!["arxiv.org".into()],
            biomedical: vec!["pubmed.ncbi.nlm.nih.gov".into()],
        }
    }
}

/// Which fetch path a URL takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrapeRoute {
    Encyclopedia,
    Preprint,
    Biomedical,
    Generic,
}

/// Extracted page text plus trace metadata.
#[derive(Debug, Clone)]
pub struct ScrapedPage {
    pub url: String,
    pub route: ScrapeRoute,
    pub text: String,
}

fn host_matches(host: &str, domains: &[String]) -> bool {
    domains.iter().any(|d| host == d || host.ends_with(&format!(".{d}")))
}

/// Routing predicate: which handler would fetch this URL.
pub fn scrape_route(url: &str, handlers: &SiteHandlers) -> ScrapeRoute {
    let host = match Url::parse(url).ok().and_then(|u| u.host_str().map(str::to_string)) {
        Some(h) => h,
        None => return ScrapeRoute::Generic,
    };
    if host_matches(&host, &handlers.encyclopedia) {
        ScrapeRoute::Encyclopedia
    } else if host_matches(&host, &handlers.preprint) {
        ScrapeRoute::Preprint
    } else if host_matches(&host, &handlers.biomedical) {
        ScrapeRoute::Biomedical
    } else {
        ScrapeRoute::Generic
    }
}

/// Pages larger than this (in characters) are truncated before chunking.
pub const MAX_PAGE_CHARS: usize = 2 * 1024 * 1024;

/// Fetches `url` and returns its extracted main text. The result may be
/// empty; network failures and HTTP >= 400 are recoverable errors that the
/// pipeline reports and skips.
pub fn scrape_page(
    gateway: &Gateway,
    url: &str,
    handlers: &SiteHandlers,
) -> Result<ScrapedPage, SearchError> {
    let parsed = Url::parse(url).map_err(|_| SearchError::BadUrl(url.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(SearchError::BadUrl(url.to_string()));
    }
    let route = scrape_route(url, handlers);
    let text = match route {
        ScrapeRoute::Encyclopedia => fetch_encyclopedia(gateway, &parsed)?,
        ScrapeRoute::Preprint => fetch_preprint(gateway, &parsed)?,
        ScrapeRoute::Biomedical => fetch_biomedical(gateway, &parsed)?,
        ScrapeRoute::Generic => {
            let body = fetch_ok(gateway, HttpRequestSpec::get(url))?;
            strip_html(&truncate_chars(&body, MAX_PAGE_CHARS))
        }
    };
    Ok(ScrapedPage { url: url.to_string(), route, text: truncate_chars(&text, MAX_PAGE_CHARS) })
}

fn fetch_ok(gateway: &Gateway, req: HttpRequestSpec) -> Result<String, SearchError> {
    let resp = gateway.http(&req).map_err(|e| match e {
        GatewayError::Timeout => SearchError::Timeout,
        other => SearchError::Fetch(other.to_string()),
    })?;
    if resp.status >= 400 {
        return Err(SearchError::FetchStatus(resp.status));
    }
    Ok(resp.body_text())
}

fn fetch_encyclopedia(gateway: &Gateway, url: &Url) -> Result<String, SearchError> {
    let host = url.host_str().unwrap_or_default();
    let title = url
        .path_segments()
        .and_then(|segments| segments.last())
        .filter(|s| !s.is_empty())
        .unwrap_or_default();
    let api = format!(
        "https://{host}/w/api.php?action=query&format=json&prop=extracts&explaintext=1&redirects=1&titles={title}"
    );
    let body = fetch_ok(gateway, HttpRequestSpec::get(api))?;
    let value: serde_json::Value = serde_json::from_str(&body)
        .map_err(|e| SearchError::Fetch(format!("bad extract response: {e}")))?;
    let extract = value
        .pointer("/query/pages")
        .and_then(|pages| pages.as_object())
        .and_then(|pages| pages.values().next())
        .and_then(|page| page.get("extract"))
        .and_then(|e| e.as_str())
        .unwrap_or_default();
    Ok(collapse_whitespace(extract))
}

fn fetch_preprint(gateway: &Gateway, url: &Url) -> Result<String, SearchError> {
    let id = url
        .path_segments()
        .map(|segments| segments.filter(|s| !s.is_empty()).collect::<Vec<_>>())
        .and_then(|parts| parts.last().map(|s| s.to_string()))
        .unwrap_or_default();
    let id = id.trim_end_matches(".pdf");
    let api = format!("http://export.arxiv.org/api/query?id_list={id}");
    let body = fetch_ok(gateway, HttpRequestSpec::get(api))?;
    // The feed is XML; tag stripping leaves the title/abstract text.
    Ok(strip_html(&body))
}

fn fetch_biomedical(gateway: &Gateway, url: &Url) -> Result<String, SearchError> {
    let id: String = url
        .path_segments()
        .map(|segments| segments.filter(|s| !s.is_empty()).collect::<Vec<_>>())
        .and_then(|parts| parts.last().map(|s| s.to_string()))
        .unwrap_or_default()
        .chars()
        .filter(|c| c.is_ascii_digit())
        .collect();
    let api = format!(
        "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/efetch.fcgi?db=pubmed&id={id}&rettype=abstract&retmode=text"
    );
    let body = fetch_ok(gateway, HttpRequestSpec::get(api))?;
    Ok(collapse_whitespace(&body))
}

fn truncate_chars(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        s.chars().take(max).collect()
    }
}

/// Strips tags (dropping script/style/noscript contents and comments),
/// decodes common entities, and collapses whitespace.
pub fn strip_html(html: &str) -> String {
    let mut out = String::with_capacity(html.len() / 2);
    let bytes = html.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            if html[i..].starts_with("<!--") {
                match html[i + 4..].find("-->") {
                    Some(end) => i += 4 + end + 3,
                    None => break,
                }
                continue;
            }
            let rest = &html[i + 1..];
            let lower = rest.to_lowercase();
            let skip_tag = ["script", "style", "noscript"]
                .iter()
                .find(|t| {
                    lower.strip_prefix(**t).is_some_and(|after| {
                        after.starts_with('>') || after.starts_with(char::is_whitespace) || after.starts_with('/')
                    })
                })
                .copied();
            match rest.find('>') {
                Some(gt) => {
                    i += 1 + gt + 1;
                    if let Some(tag) = skip_tag {
                        let close = format!("</{tag}");
                        let lower_rest = html[i..].to_lowercase();
                        match lower_rest.find(&close) {
                            Some(pos) => {
                                let after = i + pos;
                                match html[after..].find('>') {
                                    Some(gt2) => i = after + gt2 + 1,
                                    None => break,
                                }
                            }
                            None => break,
                        }
                    }
                    out.push(' ');
                }
                None => break,
            }
        } else if bytes[i] == b'&' {
            let rest = &html[i..];
            let (text, used) = decode_entity(rest);
            out.push_str(&text);
            i += used;
        } else {
            let ch = html[i..].chars().next().unwrap();
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    collapse_whitespace(&out)
}

fn decode_entity(s: &str) -> (String, usize) {
    const TABLE: &[(&str, &str)] = &[
        ("&amp;", "&"),
        ("&lt;", "<"),
        ("&gt;", ">"),
        ("&quot;", "\""),
        ("&#39;", "'"),
        ("&apos;", "'"),
        ("&nbsp;", " "),
    ];
    for (entity, text) in TABLE {
        if s.starts_with(entity) {
            return (text.to_string(), entity.len());
        }
    }
    ("&".to_string(), 1)
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
