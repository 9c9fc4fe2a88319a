use thiserror::Error;

use crate::model::NodeId;

/// Failures raised by a provider (generation, search, embedding).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    /// Network, auth or server failure. Retryable.
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    /// The provider answered with an empty completion. Retryable.
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    /// A replay cassette has no entry for this request.
    #[error("cassette has no recording for request {fingerprint}")]
    CassetteMiss { fingerprint: String },
    /// The request itself is malformed; never retried.
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// The provider answered with something that could not be decoded.
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Unavailable(_) | Self::EmptyCompletion)
    }
}

/// Validation failures for domain values.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum InvalidValue {
    #[error("topic must contain at least one non-whitespace character")]
    EmptyTopic,
    #[error("invalid run configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OutlineError {
    #[error("no heading lines could be parsed from the outline text")]
    EmptyOutline,
    #[error("outline generation failed: {0}")]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AcquisitionError {
    #[error(transparent)]
    Config(#[from] InvalidValue),
    /// The initial topic search could not reach the search provider.
    #[error("provider bootstrap failed: {0}")]
    Bootstrap(ProviderError),
    #[error("expansion plan for node {node} could not be parsed")]
    UnparseablePlan { node: NodeId },
    #[error("expansion of node {node} would reach depth {depth}, above the limit {max_depth}")]
    DepthExceeded { node: NodeId, depth: u32, max_depth: u32 },
    #[error("expansion targets node {0}, which is not a leaf of the current tree")]
    NotALeaf(NodeId),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvaluationError {
    #[error("text is empty or whitespace-only")]
    InvalidText,
    #[error("diversity needs at least two documents, got {0}")]
    TooFewDocuments(usize),
    #[error("embedding failed: {0}")]
    Provider(#[from] ProviderError),
}
