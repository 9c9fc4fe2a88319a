//! Domain values shared by every stage of the pipeline.
//!
//! Everything here is plain data: no provider calls, no file I/O. Values are
//! built once and replaced wholesale when a stage produces a new revision.

mod article;
mod concepts;
mod config;
mod document;
mod facts;
mod outline;
mod text;
mod tree;

pub(crate) use article::is_heading_line;
pub use article::{
    markers_in, parse_article_markup, prose_of, rewrite_markers, Article, ArticleMarkup, ArticleStage, ReferenceLine,
    Section, CITATION_MARKER, PLACEHOLDER_BODY,
};
pub use concepts::{ConceptPool, ConceptualBuffer, Insight, InsightId, SupersededInsight};
pub use config::RunConfig;
pub use document::{normalize_url, DocId, RetrievedDocument};
pub use facts::{AtomicFact, DedupDecision, DedupMethod, FactEngine, KdReport};
pub use outline::{parse_outline, render_outline, Heading, Outline, ParsedOutline};
pub use text::{normalize_for_match, normalize_whitespace, word_count};
pub use tree::{validate_tree, InfoNode, InformationTree, NodeId, TreeViolation};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::InvalidValue;

/// The subject an article is written about. Always non-empty and trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Topic(String);

impl Topic {
    pub fn new(text: impl AsRef<str>) -> Result<Self, InvalidValue> {
        let trimmed = text.as_ref().trim();
        if trimmed.is_empty() {
            return Err(InvalidValue::EmptyTopic);
        }
        Ok(Self(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Case-insensitive comparison against a heading or label.
    pub fn matches(&self, other: &str) -> bool {
        normalize_for_match(&self.0) == normalize_for_match(other)
    }
}

impl TryFrom<String> for Topic {
    type Error = InvalidValue;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Topic> for String {
    fn from(topic: Topic) -> Self {
        topic.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
