use serde::{Deserialize, Serialize};

use super::Topic;
use crate::error::InvalidValue;

/// Parameters of one writing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub topic: Topic,
    /// Upper bound on information-tree depth, and on acquisition iterations.
    pub max_depth: u32,
    /// Pages requested per search query.
    pub results_per_query: usize,
    /// Documents handed to the writer for each section.
    pub section_retrieve_count: usize,
    pub gen_temperature: f64,
    pub gen_nucleus: f64,
    pub seed: u64,
    pub max_children_per_node: usize,
    /// Word budget for the concept list shown to the outline polisher.
    pub pool_word_budget: usize,
    /// Concurrent provider calls within a stage.
    pub workers: usize,
}

impl RunConfig {
    pub const DEFAULT_MAX_DEPTH: u32 = 3;
    pub const DEFAULT_RESULTS_PER_QUERY: usize = 5;
    pub const DEFAULT_SECTION_RETRIEVE_COUNT: usize = 3;
    pub const DEFAULT_TEMPERATURE: f64 = 1.0;
    pub const DEFAULT_NUCLEUS: f64 = 0.9;
    pub const DEFAULT_MAX_CHILDREN: usize = 3;
    pub const DEFAULT_POOL_WORD_BUDGET: usize = 2000;
    pub const DEFAULT_WORKERS: usize = 4;

    pub fn new(topic: Topic) -> Self {
        Self {
            topic,
            max_depth: Self::DEFAULT_MAX_DEPTH,
            results_per_query: Self::DEFAULT_RESULTS_PER_QUERY,
            section_retrieve_count: Self::DEFAULT_SECTION_RETRIEVE_COUNT,
            gen_temperature: Self::DEFAULT_TEMPERATURE,
            gen_nucleus: Self::DEFAULT_NUCLEUS,
            seed: 0,
            max_children_per_node: Self::DEFAULT_MAX_CHILDREN,
            pool_word_budget: Self::DEFAULT_POOL_WORD_BUDGET,
            workers: Self::DEFAULT_WORKERS,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidValue> {
        let bad = |m: &str| Err(InvalidValue::Config(m.to_string()));
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if self.results_per_query < 1 {
            return bad("results_per_query must be at least 1");
        }
        if self.section_retrieve_count < 1 {
            return bad("section_retrieve_count must be at least 1");
        }
        if self.max_children_per_node < 1 {
            return bad("max_children_per_node must be at least 1");
        }
        if !(self.gen_nucleus > 0.0 && self.gen_nucleus <= 1.0) {
            return bad("gen_nucleus must lie in (0, 1]");
        }
        if !self.gen_temperature.is_finite() || self.gen_temperature < 0.0 {
            return bad("gen_temperature must be a finite non-negative number");
        }
        if self.workers < 1 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }
}
