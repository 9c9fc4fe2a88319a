//! Record/replay layer for provider calls.
//!
//! A [`Cassette`] maps request fingerprints to recorded responses. In
//! `Replay` mode the wrapped provider is never called, so a replayed run does
//! no network I/O at all. The file form is pretty-printed JSON with entries
//! sorted by fingerprint, one `{kind, request, response}` record each.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use super::{fingerprint, Embedder, EmbeddingVector, GenerationRequest, SearchEngine, SearchRequest, TextGenerator};
use crate::error::ProviderError;
use crate::model::RetrievedDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CassetteMode {
    Record,
    Replay,
    Passthrough,
}

impl FromStr for CassetteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "record" => Ok(Self::Record),
            "replay" => Ok(Self::Replay),
            "passthrough" => Ok(Self::Passthrough),
            other => Err(format!("unknown cassette mode {other:?} (record, replay, passthrough)")),
        }
    }
}

impl fmt::Display for CassetteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Record => "record",
            Self::Replay => "replay",
            Self::Passthrough => "passthrough",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub kind: String,
    pub request: Value,
    pub response: Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct CassetteFile {
    version: u32,
    entries: BTreeMap<String, CassetteEntry>,
}

#[derive(Debug)]
pub struct Cassette {
    mode: CassetteMode,
    entries: Mutex<BTreeMap<String, CassetteEntry>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CassetteIoError {
    #[error("cassette i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cassette format: {0}")]
    Format(#[from] serde_json::Error),
}

impl Cassette {
    pub fn new(mode: CassetteMode) -> Self {
        Self {
            mode,
            entries: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn load(path: &Path, mode: CassetteMode) -> Result<Self, CassetteIoError> {
        let file: CassetteFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Ok(Self {
            mode,
            entries: Mutex::new(file.entries),
        })
    }

    pub fn to_json(&self) -> String {
        let file = CassetteFile {
            version: 1,
            entries: self.entries.lock().unwrap().clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("cassette serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), CassetteIoError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn mode(&self) -> CassetteMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn through<T: Serialize + DeserializeOwned>(
        &self,
        canonical: Value,
        call: impl FnOnce() -> Result<T, ProviderError>,
    ) -> Result<T, ProviderError> {
        let fp = fingerprint::of_value(&canonical);
        match self.mode {
            CassetteMode::Passthrough => call(),
            CassetteMode::Replay => {
                let entries = self.entries.lock().unwrap();
                let entry = entries.get(&fp).ok_or_else(|| ProviderError::CassetteMiss {
                    fingerprint: fp.clone(),
                })?;
                serde_json::from_value(entry.response.clone())
                    .map_err(|e| ProviderError::MalformedResponse(format!("cassette entry {fp}: {e}")))
            }
            CassetteMode::Record => {
                let out = call()?;
                let kind = canonical["kind"].as_str().unwrap_or("unknown").to_string();
                let response =
                    serde_json::to_value(&out).map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
                self.entries.lock().unwrap().insert(
                    fp,
                    CassetteEntry {
                        kind,
                        request: canonical,
                        response,
                    },
                );
                Ok(out)
            }
        }
    }
}

fn wrapped_name(cassette: &Cassette, inner: &str) -> String {
    format!("cassette[{}]:{inner}", cassette.mode)
}

pub struct CassetteGenerator {
    inner: Arc<dyn TextGenerator>,
    cassette: Arc<Cassette>,
    name: String,
}

impl CassetteGenerator {
    pub fn new(inner: Arc<dyn TextGenerator>, cassette: Arc<Cassette>) -> Self {
        let name = wrapped_name(&cassette, inner.name());
        Self { inner, cassette, name }
    }
}

impl TextGenerator for CassetteGenerator {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, ProviderError> {
        self.cassette
            .through(fingerprint::canonical_generation(req), || self.inner.generate(req))
    }
}

pub struct CassetteSearch {
    inner: Arc<dyn SearchEngine>,
    cassette: Arc<Cassette>,
    name: String,
}

impl CassetteSearch {
    pub fn new(inner: Arc<dyn SearchEngine>, cassette: Arc<Cassette>) -> Self {
        let name = wrapped_name(&cassette, inner.name());
        Self { inner, cassette, name }
    }
}

impl SearchEngine for CassetteSearch {
    fn name(&self) -> &str {
        &self.name
    }

    fn search(&self, req: &SearchRequest) -> Result<Vec<RetrievedDocument>, ProviderError> {
        self.cassette
            .through(fingerprint::canonical_search(req), || self.inner.search(req))
    }
}

pub struct CassetteEmbedder {
    inner: Arc<dyn Embedder>,
    cassette: Arc<Cassette>,
    name: String,
}

impl CassetteEmbedder {
    pub fn new(inner: Arc<dyn Embedder>, cassette: Arc<Cassette>) -> Self {
        let name = wrapped_name(&cassette, inner.name());
        Self { inner, cassette, name }
    }
}

impl Embedder for CassetteEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.cassette
            .through(fingerprint::canonical_embedding(texts), || self.inner.embed(texts))
    }
}
