use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::document::{DocId, RetrievedDocument};
use super::text::word_count;
use super::Topic;

/// Pattern of an inline citation marker such as `[3]`.
pub const CITATION_MARKER: &str = r"\[(\d+)\]";

pub(crate) fn marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(CITATION_MARKER).unwrap())
}

/// Marker numbers in order of appearance (repeats included).
pub fn markers_in(text: &str) -> Vec<u32> {
    marker_re()
        .captures_iter(text)
        .filter_map(|c| c[1].parse().ok())
        .collect()
}

/// Rewrites every marker through `map`; markers mapped to `None` are removed.
pub fn rewrite_markers(text: &str, mut map: impl FnMut(u32) -> Option<u32>) -> String {
    marker_re()
        .replace_all(text, |c: &Captures| match c[1].parse::<u32>().ok().and_then(&mut map) {
            Some(n) => format!("[{n}]"),
            None => String::new(),
        })
        .into_owned()
}

pub(crate) fn is_heading_line(line: &str) -> bool {
    let t = line.trim_start();
    let hashes = t.chars().take_while(|c| *c == '#').count();
    hashes > 0 && t[hashes..].starts_with(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    /// Titles from the top-level heading down to this section's heading.
    pub heading_path: Vec<String>,
    /// Text beginning with this section's own `#` heading line.
    pub body: String,
    pub local_citations: BTreeMap<u32, DocId>,
}

impl Section {
    pub fn level(&self) -> usize {
        self.heading_path.len()
    }

    pub fn title(&self) -> &str {
        self.heading_path.last().map(String::as_str).unwrap_or_default()
    }

    pub fn heading_line(&self) -> String {
        format!("{} {}", "#".repeat(self.level().max(1)), self.title())
    }

    pub fn markers(&self) -> Vec<u32> {
        markers_in(&self.body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArticleStage {
    Draft,
    Polished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub topic: Topic,
    pub sections: Vec<Section>,
    pub bibliography: BTreeMap<u32, RetrievedDocument>,
    pub stage: ArticleStage,
}

impl Article {
    /// Section bodies joined by blank lines, without the reference list.
    pub fn body_text(&self) -> String {
        self.sections
            .iter()
            .map(|s| s.body.trim_end())
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    /// Body text with heading lines and citation markers removed.
    pub fn prose(&self) -> String {
        prose_of(&self.body_text())
    }

    pub fn word_count(&self) -> usize {
        word_count(&self.body_text())
    }

    /// Full markup: body followed by a `# References` list of
    /// `n. title — url` lines.
    pub fn render_markdown(&self) -> String {
        let mut out = self.body_text();
        if !self.bibliography.is_empty() {
            out.push_str("\n\n# References\n");
            for (n, doc) in &self.bibliography {
                out.push_str(&format!("{n}. {} — {}\n", doc.title, doc.url));
            }
        } else {
            out.push('\n');
        }
        out
    }

    /// Every marker in the body, in order.
    pub fn markers(&self) -> Vec<u32> {
        self.sections.iter().flat_map(|s| s.markers()).collect()
    }

    /// Broken citation invariants; empty when the article is sound.
    pub fn citation_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let used: BTreeSet<u32> = self.markers().into_iter().collect();
        let keys: BTreeSet<u32> = self.bibliography.keys().copied().collect();
        for n in used.difference(&keys) {
            out.push(format!("marker [{n}] has no bibliography entry"));
        }
        for n in keys.difference(&used) {
            out.push(format!("bibliography entry {n} is never cited"));
        }
        let expected: BTreeSet<u32> = (1..=keys.len() as u32).collect();
        if keys != expected {
            out.push(format!("bibliography numbers {keys:?} are not 1..{}", keys.len()));
        }
        for s in &self.sections {
            for n in s.markers() {
                match s.local_citations.get(&n) {
                    None => out.push(format!(
                        "section {:?}: marker [{n}] missing from local citations",
                        s.title()
                    )),
                    Some(doc) => {
                        if self.bibliography.get(&n).is_some_and(|d| &d.doc_id != doc) {
                            out.push(format!(
                                "section {:?}: [{n}] bound to {doc} but bibliography says otherwise",
                                s.title()
                            ));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Body of a section whose writer produced nothing usable.
pub const PLACEHOLDER_BODY: &str = "(content unavailable)";

/// Strips heading lines, placeholder bodies and citation markers, keeping
/// running prose.
pub fn prose_of(text: &str) -> String {
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !is_heading_line(l) && l.trim() != PLACEHOLDER_BODY)
        .collect();
    rewrite_markers(&kept.join("\n"), |_| None)
}

/// One line of a rendered reference list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub number: u32,
    pub title: String,
    pub url: String,
}

/// An article markup file split into body and reference list.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleMarkup {
    pub body: String,
    pub references: Vec<ReferenceLine>,
}

/// Splits rendered article markup at its trailing `# References` heading.
pub fn parse_article_markup(text: &str) -> ArticleMarkup {
    let lines: Vec<&str> = text.lines().collect();
    let split = lines.iter().rposition(|l| l.trim() == "# References");
    let Some(idx) = split else {
        return ArticleMarkup {
            body: text.trim_end().to_string(),
            references: Vec::new(),
        };
    };
    let entry = Regex::new(r"^(\d+)\.\s+(.*?)\s+—\s+(\S*)\s*$").unwrap();
    let references = lines[idx + 1..]
        .iter()
        .filter_map(|l| entry.captures(l.trim()))
        .filter_map(|c| {
            Some(ReferenceLine {
                number: c[1].parse().ok()?,
                title: c[2].to_string(),
                url: c[3].to_string(),
            })
        })
        .collect();
    ArticleMarkup {
        body: lines[..idx].join("\n").trim_end().to_string(),
        references,
    }
}
