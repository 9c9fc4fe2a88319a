//! HTTP clients for a chat-completion endpoint, a Bing-style web search
//! endpoint and an embeddings endpoint.
//!
//! All network access goes through a [`Transport`], so tests can swap in a
//! canned or counting transport and assert exactly how many calls were made.

use chrono::Utc;
use serde_json::{json, Value};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use super::{Embedder, EmbeddingVector, GenerationRequest, SearchEngine, SearchRequest, TextGenerator};
use crate::error::ProviderError;
use crate::model::RetrievedDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub method: Method,
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub query: Vec<(String, String)>,
    pub body: Option<Value>,
}

/// Sends one JSON request and returns the decoded JSON response.
pub trait Transport: Send + Sync {
    fn send(&self, req: &HttpRequest) -> Result<Value, ProviderError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(120))
    }
}

impl Transport for UreqTransport {
    fn send(&self, req: &HttpRequest) -> Result<Value, ProviderError> {
        let unavailable =
            |e: ureq::Error| ProviderError::Unavailable(format!("{} {}: {e}", method_str(req.method), req.url));
        let mut response = match req.method {
            Method::Get => {
                let mut r = self.agent.get(&req.url);
                for (k, v) in &req.query {
                    r = r.query(k, v);
                }
                for (k, v) in &req.headers {
                    r = r.header(k, v);
                }
                r.call().map_err(unavailable)?
            }
            Method::Post => {
                let mut r = self.agent.post(&req.url);
                for (k, v) in &req.query {
                    r = r.query(k, v);
                }
                for (k, v) in &req.headers {
                    r = r.header(k, v);
                }
                r.send_json(req.body.clone().unwrap_or(Value::Null))
                    .map_err(unavailable)?
            }
        };
        response
            .body_mut()
            .read_json::<Value>()
            .map_err(|e| ProviderError::MalformedResponse(e.to_string()))
    }
}

fn method_str(m: Method) -> &'static str {
    match m {
        Method::Get => "GET",
        Method::Post => "POST",
    }
}

/// Wraps a transport and counts every request that reaches it.
pub struct CountingTransport {
    inner: Arc<dyn Transport>,
    calls: AtomicUsize,
}

impl CountingTransport {
    pub fn new(inner: Arc<dyn Transport>) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for CountingTransport {
    fn send(&self, req: &HttpRequest) -> Result<Value, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.send(req)
    }
}

/// A transport with no network behind it; every call fails as unavailable.
pub struct UnreachableTransport;

impl Transport for UnreachableTransport {
    fn send(&self, req: &HttpRequest) -> Result<Value, ProviderError> {
        Err(ProviderError::Unavailable(format!("{} is unreachable", req.url)))
    }
}

/// Endpoint coordinates shared by the three clients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
}

impl Endpoint {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: None,
            model: None,
        }
    }

    pub fn with_key(mut self, key: Option<String>) -> Self {
        self.api_key = key.filter(|k| !k.is_empty());
        self
    }

    pub fn with_model(mut self, model: Option<String>) -> Self {
        self.model = model.filter(|m| !m.is_empty());
        self
    }

    fn url(&self, path: &str) -> String {
        format!(
            "{}/{}",
            self.base_url.trim_end_matches('/'),
            path.trim_start_matches('/')
        )
    }

    fn bearer(&self) -> Vec<(String, String)> {
        self.api_key
            .iter()
            .map(|k| ("Authorization".to_string(), format!("Bearer {k}")))
            .collect()
    }
}

/// OpenAI-compatible `POST /chat/completions` client.
pub struct ChatCompletionClient {
    transport: Arc<dyn Transport>,
    endpoint: Endpoint,
}

impl ChatCompletionClient {
    pub fn new(transport: Arc<dyn Transport>, endpoint: Endpoint) -> Self {
        Self { transport, endpoint }
    }
}

impl TextGenerator for ChatCompletionClient {
    fn name(&self) -> &str {
        "chat-completions"
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, ProviderError> {
        let mut body = json!({
            "model": self.endpoint.model.clone().unwrap_or_else(|| "gpt-4o".to_string()),
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "top_p": req.nucleus,
        });
        if let Some(words) = req.max_output_words {
            // rough words→tokens conversion
            body["max_tokens"] = json!(words * 2);
        }
        let resp = self.transport.send(&HttpRequest {
            method: Method::Post,
            url: self.endpoint.url("chat/completions"),
            headers: self.endpoint.bearer(),
            query: vec![],
            body: Some(body),
        })?;
        let text = resp["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| ProviderError::MalformedResponse("missing choices[0].message.content".into()))?;
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyCompletion);
        }
        Ok(text.to_string())
    }
}

/// Bing Web Search v7 style client (`GET /v7.0/search`). Uses each page's
/// snippet as document content.
pub struct WebSearchClient {
    transport: Arc<dyn Transport>,
    endpoint: Endpoint,
}

impl WebSearchClient {
    pub fn new(transport: Arc<dyn Transport>, endpoint: Endpoint) -> Self {
        Self { transport, endpoint }
    }
}

impl SearchEngine for WebSearchClient {
    fn name(&self) -> &str {
        "web-search"
    }

    fn search(&self, req: &SearchRequest) -> Result<Vec<RetrievedDocument>, ProviderError> {
        let headers = self
            .endpoint
            .api_key
            .iter()
            .map(|k| ("Ocp-Apim-Subscription-Key".to_string(), k.clone()))
            .collect();
        let resp = self.transport.send(&HttpRequest {
            method: Method::Get,
            url: self.endpoint.url("v7.0/search"),
            headers,
            query: vec![("q".into(), req.query.clone()), ("count".into(), req.count.to_string())],
            body: None,
        })?;
        let Some(pages) = resp["webPages"]["value"].as_array() else {
            return Ok(Vec::new());
        };
        let now = Utc::now();
        Ok(pages
            .iter()
            .filter_map(|p| {
                let url = p["url"].as_str()?;
                let content = p["snippet"].as_str().filter(|s| !s.trim().is_empty())?;
                let title = p["name"].as_str().unwrap_or(url);
                Some(RetrievedDocument::new(url, title, content, req.query.clone(), now))
            })
            .take(req.count)
            .collect())
    }
}

/// OpenAI-compatible `POST /embeddings` client. Vectors are normalized on
/// receipt.
pub struct EmbeddingsClient {
    transport: Arc<dyn Transport>,
    endpoint: Endpoint,
}

impl EmbeddingsClient {
    pub fn new(transport: Arc<dyn Transport>, endpoint: Endpoint) -> Self {
        Self { transport, endpoint }
    }
}

impl Embedder for EmbeddingsClient {
    fn name(&self) -> &str {
        "embeddings"
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let resp = self.transport.send(&HttpRequest {
            method: Method::Post,
            url: self.endpoint.url("embeddings"),
            headers: self.endpoint.bearer(),
            query: vec![],
            body: Some(json!({
                "model": self.endpoint.model.clone().unwrap_or_else(|| "text-embedding-3-small".to_string()),
                "input": texts,
            })),
        })?;
        let data = resp["data"]
            .as_array()
            .ok_or_else(|| ProviderError::MalformedResponse("missing data array".into()))?;
        let mut rows: Vec<(u64, Vec<f64>)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item["index"].as_u64().unwrap_or(pos as u64);
            let values = item["embedding"]
                .as_array()
                .ok_or_else(|| ProviderError::MalformedResponse("missing embedding".into()))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| ProviderError::MalformedResponse("non-numeric embedding".into()))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push((index, values));
        }
        rows.sort_by_key(|(i, _)| *i);
        rows.into_iter().map(|(_, v)| EmbeddingVector::normalized(v)).collect()
    }
}
