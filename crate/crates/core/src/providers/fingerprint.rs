//! Stable request fingerprints for cassettes and scripted mocks.
//!
//! A fingerprint is the SHA-256 of a canonical JSON document: keys sorted,
//! prompt and query whitespace collapsed. Cosmetic whitespace changes in a
//! prompt therefore do not invalidate a recording.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{GenerationRequest, SearchRequest};
use crate::model::normalize_whitespace;

pub fn canonical_generation(req: &GenerationRequest) -> Value {
    json!({
        "kind": "generate",
        "max_output_words": req.max_output_words,
        "nucleus": req.nucleus,
        "prompt": normalize_whitespace(&req.prompt),
        "temperature": req.temperature,
    })
}

pub fn canonical_search(req: &SearchRequest) -> Value {
    json!({
        "count": req.count,
        "kind": "search",
        "query": normalize_whitespace(&req.query),
    })
}

pub fn canonical_embedding(texts: &[String]) -> Value {
    json!({
        "kind": "embed",
        "texts": texts.iter().map(|t| normalize_whitespace(t)).collect::<Vec<_>>(),
    })
}

/// Hex SHA-256 of the canonical form. `serde_json` maps are ordered, so the
/// serialization is stable.
pub fn of_value(canonical: &Value) -> String {
    let bytes = serde_json::to_vec(canonical).expect("json values always serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn generation(req: &GenerationRequest) -> String {
    of_value(&canonical_generation(req))
}

pub fn search(req: &SearchRequest) -> String {
    of_value(&canonical_search(req))
}

pub fn embedding(texts: &[String]) -> String {
    of_value(&canonical_embedding(texts))
}
