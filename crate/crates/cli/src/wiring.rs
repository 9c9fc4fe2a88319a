//! Builds the provider stack a run uses: mock or HTTP providers, optionally
//! wrapped in a cassette.

use std::sync::Arc;
use std::time::Duration;

use treewrite::providers::cassette::{Cassette, CassetteEmbedder, CassetteGenerator, CassetteMode, CassetteSearch};
use treewrite::providers::http::{
    ChatCompletionClient, EmbeddingsClient, Endpoint, Transport, UnreachableTransport, UreqTransport, WebSearchClient,
};
use treewrite::providers::mock::{HashingEmbedder, LayeredUniverse, SyntheticLlm};
use treewrite::providers::{Embedder, Providers, RetryPolicy, SearchEngine, TextGenerator};

use crate::settings::{EndpointSettings, ProviderKind, Settings};
use crate::Failure;

/// Placeholder base URL for HTTP clients that are never reached in replay.
const OFFLINE_URL: &str = "http://offline.invalid";

pub struct Wired {
    pub providers: Providers,
    pub cassette: Option<Arc<Cassette>>,
}

pub fn build(settings: &Settings) -> Result<Wired, Failure> {
    build_with_transport(settings, None)
}

/// Like [`build`], with an explicit transport for the HTTP clients. Replay
/// mode defaults to a transport that cannot reach the network.
pub fn build_with_transport(settings: &Settings, transport: Option<Arc<dyn Transport>>) -> Result<Wired, Failure> {
    let replay = matches!(settings.cassette, Some((_, CassetteMode::Replay)));
    let (llm, search, embedder, retry) = match settings.provider {
        ProviderKind::Mock => mock_stack(settings),
        ProviderKind::Http => {
            let transport = transport.unwrap_or_else(|| {
                if replay {
                    Arc::new(UnreachableTransport)
                } else {
                    Arc::new(UreqTransport::new(Duration::from_secs(120)))
                }
            });
            let endpoint = |name: &str, e: &EndpointSettings| -> Result<Endpoint, Failure> {
                let base = match (&e.base_url, replay) {
                    (Some(u), _) => u.clone(),
                    (None, true) => OFFLINE_URL.to_string(),
                    (None, false) => {
                        return Err(Failure::config(format!(
                            "http provider needs --{name}-base-url (or TREEWRITE_{}_BASE_URL)",
                            name.to_uppercase()
                        )))
                    }
                };
                Ok(Endpoint::new(base)
                    .with_key(e.api_key.clone())
                    .with_model(e.model.clone()))
            };
            let llm: Arc<dyn TextGenerator> = Arc::new(ChatCompletionClient::new(
                transport.clone(),
                endpoint("llm", &settings.llm)?,
            ));
            let search: Arc<dyn SearchEngine> = Arc::new(WebSearchClient::new(
                transport.clone(),
                endpoint("search", &settings.search)?,
            ));
            let embedder: Arc<dyn Embedder> =
                Arc::new(EmbeddingsClient::new(transport, endpoint("embed", &settings.embed)?));
            (llm, search, embedder, RetryPolicy::default())
        }
    };

    let Some((path, mode)) = &settings.cassette else {
        return Ok(Wired {
            providers: Providers::new(llm, search, embedder).with_retry(retry),
            cassette: None,
        });
    };
    let cassette = match mode {
        CassetteMode::Record => Cassette::new(CassetteMode::Record),
        other => Cassette::load(path, *other)
            .map_err(|e| Failure::config(format!("cannot load cassette {}: {e}", path.display())))?,
    };
    let cassette = Arc::new(cassette);
    // replayed failures cannot change on retry
    let retry = if *mode == CassetteMode::Replay {
        RetryPolicy::immediate()
    } else {
        retry
    };
    let providers = Providers::new(
        Arc::new(CassetteGenerator::new(llm, cassette.clone())),
        Arc::new(CassetteSearch::new(search, cassette.clone())),
        Arc::new(CassetteEmbedder::new(embedder, cassette.clone())),
    )
    .with_retry(retry);
    Ok(Wired {
        providers,
        cassette: Some(cassette),
    })
}

type Stack = (
    Arc<dyn TextGenerator>,
    Arc<dyn SearchEngine>,
    Arc<dyn Embedder>,
    RetryPolicy,
);

fn mock_stack(settings: &Settings) -> Stack {
    let seed = settings.config.seed;
    let m = settings.mock;
    let universe = LayeredUniverse {
        topic: settings.config.topic.as_str().to_string(),
        levels: m.levels,
        branching: m.branching,
        docs_per_node: m.docs_per_node,
    };
    (
        Arc::new(SyntheticLlm::new(seed).with_branching(m.branching)),
        Arc::new(universe.build(seed)),
        Arc::new(HashingEmbedder::default()),
        RetryPolicy::immediate(),
    )
}
