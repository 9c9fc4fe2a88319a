use serde::{Deserialize, Serialize};

/// A minimal standalone statement found in evaluated text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicFact {
    pub text: String,
    /// Character offsets `[start, end)` into the evaluated text.
    pub source_span: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupMethod {
    Rule,
    Judge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupDecision {
    pub fact_index: usize,
    /// Index of the earlier fact this one repeats.
    pub duplicate_of: Option<usize>,
    pub method: DedupMethod,
}

/// Which engine produced a decomposition or dedup pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactEngine {
    Rule,
    Judge,
    /// The judge failed and the rule engine took over.
    RuleFallback,
}

/// Knowledge density of a text: unique facts per 1000 words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdReport {
    pub total_facts: usize,
    pub unique_facts: usize,
    pub word_count: usize,
    pub kd: f64,
    pub decompose_engine: FactEngine,
    pub dedupe_engine: FactEngine,
    pub facts: Vec<AtomicFact>,
    pub decisions: Vec<DedupDecision>,
}

impl KdReport {
    pub fn density(unique_facts: usize, word_count: usize) -> f64 {
        unique_facts as f64 / word_count as f64 * 1000.0
    }
}
