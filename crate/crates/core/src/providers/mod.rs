//! Narrow interfaces to text generation, web search and embedding.
//!
//! Implementations: live HTTP clients ([`http`]), deterministic mocks
//! ([`mock`]) and a record/replay layer ([`cassette`]) that can wrap either.
//! Stages never talk to an implementation directly; they go through
//! [`Providers`], which validates requests, applies the retry policy and
//! checks the post-conditions of each call.

pub mod cassette;
pub mod fingerprint;
pub mod http;
pub mod mock;
mod retry;

pub use retry::RetryPolicy;

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::sync::Arc;

use crate::error::ProviderError;
use crate::model::RetrievedDocument;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub temperature: f64,
    pub nucleus: f64,
    pub max_output_words: Option<u32>,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, temperature: f64, nucleus: f64) -> Self {
        Self {
            prompt: prompt.into(),
            temperature,
            nucleus,
            max_output_words: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.prompt.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("prompt is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    pub count: usize,
}

impl SearchRequest {
    pub const DEFAULT_COUNT: usize = 5;

    pub fn new(query: impl Into<String>) -> Self {
        Self {
            query: query.into(),
            count: Self::DEFAULT_COUNT,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.query.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("search query is empty".into()));
        }
        if self.count == 0 {
            return Err(ProviderError::InvalidRequest("search count must be at least 1".into()));
        }
        Ok(())
    }
}

/// A unit-norm embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalizes `values` to unit length. Fails on non-finite input or a
    /// zero vector.
    pub fn normalized(values: Vec<f64>) -> Result<Self, ProviderError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ProviderError::MalformedResponse(
                "embedding has non-finite values".into(),
            ));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(ProviderError::MalformedResponse("embedding is the zero vector".into()));
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine similarity. Zero when either vector has zero length. Identical
/// vectors score exactly 1.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // sqrt of the product, so that a == b gives dot / na exactly
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

pub trait TextGenerator: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, req: &GenerationRequest) -> Result<String, ProviderError>;
}

pub trait SearchEngine: Send + Sync {
    fn name(&self) -> &str;
    fn search(&self, req: &SearchRequest) -> Result<Vec<RetrievedDocument>, ProviderError>;
}

pub trait Embedder: Send + Sync {
    fn name(&self) -> &str;
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;
}

/// Thread-safe facade over the three providers used by every stage.
#[derive(Clone)]
pub struct Providers {
    pub llm: Arc<dyn TextGenerator>,
    pub search: Arc<dyn SearchEngine>,
    pub embedder: Arc<dyn Embedder>,
    pub retry: RetryPolicy,
}

impl Providers {
    pub fn new(llm: Arc<dyn TextGenerator>, search: Arc<dyn SearchEngine>, embedder: Arc<dyn Embedder>) -> Self {
        Self {
            llm,
            search,
            embedder,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Generates text; empty completions count as retryable failures.
    pub fn generate(&self, req: &GenerationRequest) -> Result<String, ProviderError> {
        req.validate()?;
        self.retry.run(|| {
            let out = self.llm.generate(req)?;
            if out.trim().is_empty() {
                Err(ProviderError::EmptyCompletion)
            } else {
                Ok(out)
            }
        })
    }

    /// Searches and enforces the result contract: at most `count` hits,
    /// unique ids, non-empty content, `source_query` set to the query.
    pub fn search(&self, req: &SearchRequest) -> Result<Vec<RetrievedDocument>, ProviderError> {
        req.validate()?;
        let hits = self.retry.run(|| self.search.search(req))?;
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(hits.len().min(req.count));
        for mut doc in hits {
            if doc.content.trim().is_empty() || !seen.insert(doc.doc_id.clone()) {
                continue;
            }
            doc.source_query = req.query.clone();
            out.push(doc);
            if out.len() == req.count {
                break;
            }
        }
        Ok(out)
    }

    pub fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(ProviderError::InvalidRequest(format!("text {i} to embed is empty")));
        }
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let out = self.retry.run(|| self.embedder.embed(texts))?;
        if out.len() != texts.len() {
            return Err(ProviderError::MalformedResponse(format!(
                "asked for {} embeddings, got {}",
                texts.len(),
                out.len()
            )));
        }
        Ok(out)
    }

    pub fn describe(&self) -> ProviderIds {
        ProviderIds {
            generation: self.llm.name().to_string(),
            search: self.search.name().to_string(),
            embedding: self.embedder.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderIds {
    pub generation: String,
    pub search: String,
    pub embedding: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_and_cosine() {
        let v = EmbeddingVector::normalized(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.values, vec![0.6, 0.8]);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!(EmbeddingVector::normalized(vec![0.0, 0.0]).is_err());
        assert!(EmbeddingVector::normalized(vec![f64::NAN]).is_err());
    }

    #[test]
    fn request_validation() {
        assert!(GenerationRequest::new("  ", 1.0, 0.9).validate().is_err());
        assert!(SearchRequest::new("q").with_count(0).validate().is_err());
        assert_eq!(SearchRequest::new("q").count, 5);
    }

    proptest! {
        #[test]
        fn normalized_vectors_have_unit_norm(v in prop::collection::vec(-1e3f64..1e3, 1..64)) {
            prop_assume!(v.iter().any(|x| *x != 0.0));
            let e = EmbeddingVector::normalized(v).unwrap();
            prop_assert!((e.norm() - 1.0).abs() <= 1e-6);
        }

        #[test]
        fn self_cosine_is_exactly_one(v in prop::collection::vec(-1e3f64..1e3, 1..64)) {
            prop_assume!(v.iter().any(|x| *x != 0.0));
            prop_assert_eq!(cosine(&v, &v), 1.0);
            let e = EmbeddingVector::normalized(v).unwrap();
            prop_assert_eq!(cosine(&e.values, &e.values), 1.0);
        }
    }
}
