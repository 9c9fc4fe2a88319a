use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use super::text::normalize_for_match;
use super::tree::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InsightId(pub u32);

impl fmt::Display for InsightId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0)
    }
}

/// A distilled point of understanding, traced back to the nodes it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Insight {
    pub insight_id: InsightId,
    pub text: String,
    pub source_node_ids: Vec<NodeId>,
    pub created_at_revision: u32,
}

/// An insight whose text was rewritten by a later merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersededInsight {
    pub insight: Insight,
    pub superseded_by: InsightId,
    pub at_revision: u32,
}

/// The evolving set of insights about the topic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptPool {
    pub insights: Vec<Insight>,
    pub revision: u32,
    /// Insights replaced by rewrites, in the order they were replaced.
    pub audit: Vec<SupersededInsight>,
}

impl ConceptPool {
    pub fn len(&self) -> usize {
        self.insights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insights.is_empty()
    }

    fn next_id(&self) -> InsightId {
        let live = self.insights.iter().map(|i| i.insight_id.0);
        let retired = self.audit.iter().map(|a| a.insight.insight_id.0);
        InsightId(live.chain(retired).max().map_or(0, |m| m + 1))
    }

    /// Merges freshly reflected insights into the pool at `revision`.
    ///
    /// `batches` holds, per leaf, the insight texts extracted from it; they are
    /// applied in the given order (callers pass ascending node id). For each
    /// leaf:
    /// - a text already present in the pool (normalized) is not duplicated; the
    ///   leaf is added to that insight's sources;
    /// - remaining texts first rewrite insights sourced solely from this leaf
    ///   (oldest first), moving the old version to the audit list;
    /// - anything left over is appended.
    ///
    /// The insight count therefore never shrinks.
    pub fn merge(&self, batches: &[(NodeId, Vec<String>)], revision: u32) -> ConceptPool {
        let mut pool = self.clone();
        pool.revision = revision;
        for (leaf, texts) in batches {
            let mut kept: BTreeSet<usize> = BTreeSet::new();
            let mut fresh: Vec<&String> = Vec::new();
            for text in texts {
                let key = normalize_for_match(text);
                if key.is_empty() {
                    continue;
                }
                let existing = pool.insights.iter().position(|i| normalize_for_match(&i.text) == key);
                match existing {
                    Some(idx) => {
                        let ins = &mut pool.insights[idx];
                        if !ins.source_node_ids.contains(leaf) {
                            ins.source_node_ids.push(*leaf);
                        }
                        kept.insert(idx);
                    }
                    None => {
                        if !fresh.iter().any(|f| normalize_for_match(f) == key) {
                            fresh.push(text);
                        }
                    }
                }
            }

            let replaceable: Vec<usize> = pool
                .insights
                .iter()
                .enumerate()
                .filter(|(idx, i)| {
                    !kept.contains(idx) && i.source_node_ids.as_slice() == [*leaf] && i.created_at_revision < revision
                })
                .map(|(idx, _)| idx)
                .collect();

            let mut fresh = fresh.into_iter();
            for idx in replaceable {
                let Some(text) = fresh.next() else { break };
                let new_id = pool.next_id();
                let old = std::mem::replace(
                    &mut pool.insights[idx],
                    Insight {
                        insight_id: new_id,
                        text: text.trim().to_string(),
                        source_node_ids: vec![*leaf],
                        created_at_revision: revision,
                    },
                );
                pool.audit.push(SupersededInsight {
                    insight: old,
                    superseded_by: new_id,
                    at_revision: revision,
                });
            }
            for text in fresh {
                let id = pool.next_id();
                pool.insights.push(Insight {
                    insight_id: id,
                    text: text.trim().to_string(),
                    source_node_ids: vec![*leaf],
                    created_at_revision: revision,
                });
            }
        }
        pool
    }

    /// Every insight id ever issued, live or retired.
    pub fn all_ids(&self) -> BTreeSet<InsightId> {
        self.insights
            .iter()
            .map(|i| i.insight_id)
            .chain(self.audit.iter().map(|a| a.insight.insight_id))
            .collect()
    }
}

/// Leaves staged for reflection at the current step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptualBuffer {
    pub leaf_node_ids: Vec<NodeId>,
}
