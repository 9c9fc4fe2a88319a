use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

/// Stable identifier of a retrieved document, derived from its normalized url.
///
/// Two search hits pointing at the same page share an id, so the id doubles as
/// the dedup key inside a node and across the whole tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(String);

impl DocId {
    pub fn for_url(url: &str) -> Self {
        let digest = Sha256::digest(normalize_url(url).as_bytes());
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Self(format!("doc-{hex}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for DocId {
    fn from(value: &str) -> Self {
        Self(value.to_string())
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical url form: lower-cased, scheme and `www.` dropped, fragment and
/// trailing slash removed.
pub fn normalize_url(url: &str) -> String {
    let mut s = url.trim().to_lowercase();
    if let Some(idx) = s.find('#') {
        s.truncate(idx);
    }
    for scheme in ["https://", "http://"] {
        if let Some(rest) = s.strip_prefix(scheme) {
            s = rest.to_string();
            break;
        }
    }
    if let Some(rest) = s.strip_prefix("www.") {
        s = rest.to_string();
    }
    while s.ends_with('/') {
        s.pop();
    }
    s
}

/// One page returned by the search provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedDocument {
    pub doc_id: DocId,
    pub url: String,
    pub title: String,
    pub content: String,
    pub source_query: String,
    pub fetched_at: DateTime<Utc>,
}

impl RetrievedDocument {
    /// Builds a document whose id is derived from `url`.
    pub fn new(
        url: impl Into<String>,
        title: impl Into<String>,
        content: impl Into<String>,
        source_query: impl Into<String>,
        fetched_at: DateTime<Utc>,
    ) -> Self {
        let url = url.into();
        Self {
            doc_id: DocId::for_url(&url),
            url,
            title: title.into(),
            content: content.into(),
            source_query: source_query.into(),
            fetched_at,
        }
    }

    pub fn dedup_key(&self) -> String {
        normalize_url(&self.url)
    }
}
