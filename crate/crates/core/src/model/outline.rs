use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use super::Topic;
use crate::error::OutlineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heading {
    pub level: u32,
    pub title: String,
}

impl Heading {
    pub fn new(level: u32, title: impl Into<String>) -> Self {
        Self {
            level,
            title: title.into(),
        }
    }
}

/// Heading hierarchy stored as an ordered list of (level, title); nesting is
/// implied by levels.
///
/// Invariants: non-empty, first heading at level 1, each heading at most one
/// level deeper than its predecessor, no title equal to the topic, titles
/// trimmed and single-line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub topic: Topic,
    pub headings: Vec<Heading>,
}

impl Outline {
    pub fn new(topic: Topic, headings: Vec<Heading>) -> Result<Self, String> {
        let outline = Self { topic, headings };
        match outline.violations().first() {
            None => Ok(outline),
            Some(v) => Err(v.clone()),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.headings.is_empty() {
            out.push("outline has no headings".to_string());
        }
        let mut prev = 0u32;
        for (i, h) in self.headings.iter().enumerate() {
            if h.level == 0 {
                out.push(format!("heading {i} has level 0"));
            }
            if h.level > prev + 1 {
                out.push(format!("heading {i} jumps from level {prev} to {}", h.level));
            }
            if h.title.is_empty() || h.title != h.title.trim() || h.title.contains('\n') {
                out.push(format!("heading {i} has a malformed title {:?}", h.title));
            }
            if self.topic.matches(&h.title) {
                out.push(format!("heading {i} repeats the topic"));
            }
            prev = h.level;
        }
        out
    }

    /// Title paths from the top-level heading down to each heading, in order.
    pub fn heading_paths(&self) -> Vec<Vec<String>> {
        let mut stack: Vec<&Heading> = Vec::new();
        let mut out = Vec::with_capacity(self.headings.len());
        for h in &self.headings {
            while stack.last().is_some_and(|top| top.level >= h.level) {
                stack.pop();
            }
            stack.push(h);
            out.push(stack.iter().map(|x| x.title.clone()).collect());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.headings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headings.is_empty()
    }
}

/// Renders one `#`-prefixed line per heading.
pub fn render_outline(outline: &Outline) -> String {
    outline
        .headings
        .iter()
        .map(|h| format!("{} {}", "#".repeat(h.level as usize), h.title))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parse result plus the repairs that were applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOutline {
    pub outline: Outline,
    pub warnings: Vec<String>,
}

fn heading_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(#+)\s+(\S.*)$").unwrap())
}

/// Parses `#`-prefixed heading lines; anything else is ignored.
///
/// Repairs instead of failing: headings echoing the topic are dropped, and a
/// heading more than one level deeper than the previous kept heading is
/// clamped to `previous + 1`. Each repair adds a warning.
pub fn parse_outline(text: &str, topic: &Topic) -> Result<ParsedOutline, OutlineError> {
    let mut headings: Vec<Heading> = Vec::new();
    let mut warnings = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        let Some(caps) = heading_line().captures(line) else {
            continue;
        };
        let level = caps[1].len() as u32;
        let title = caps[2].trim().to_string();
        if topic.matches(&title) {
            warnings.push(format!("dropped heading {title:?}: repeats the topic"));
            continue;
        }
        let limit = headings.last().map_or(1, |h| h.level + 1);
        let level = if level > limit {
            warnings.push(format!("heading {title:?} clamped from level {level} to {limit}"));
            limit
        } else {
            level
        };
        headings.push(Heading { level, title });
    }
    if headings.is_empty() {
        return Err(OutlineError::EmptyOutline);
    }
    Ok(ParsedOutline {
        outline: Outline {
            topic: topic.clone(),
            headings,
        },
        warnings,
    })
}
