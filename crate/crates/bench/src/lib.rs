//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treewrite::composition::DocumentIndex;
use treewrite::providers::mock::{HashingEmbedder, LayeredUniverse, SyntheticLlm};
use treewrite::providers::{EmbeddingVector, Providers, RetryPolicy};
use treewrite::{DocId, Engine, RunConfig, Topic};

/// `n` random unit vectors of dimension `dim` with url-like ids.
pub fn random_index(n: usize, dim: usize, seed: u64) -> DocumentIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = (0..n)
        .map(|i| DocId::for_url(&format!("https://bench.example/{i}")))
        .collect();
    let vectors = (0..n)
        .map(|_| EmbeddingVector::normalized((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
        .collect();
    DocumentIndex::from_parts(ids, vectors)
}

pub fn random_query(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Prose of `sentences` sentences, about a quarter of them repeated.
pub fn prose(sentences: usize, seed: u64) -> String {
    const WORDS: [&str; 16] = [
        "reef", "current", "algae", "storm", "coast", "shelf", "tide", "basin", "delta", "ridge", "trench", "plume",
        "kelp", "dune", "bay", "lagoon",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<String> = Vec::with_capacity(sentences);
    for i in 0..sentences {
        if i > 3 && rng.random_bool(0.25) {
            let j = rng.random_range(0..i);
            out.push(out[j].clone());
            continue;
        }
        let n = rng.random_range(6..14);
        let words: Vec<&str> = (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
        out.push(format!("The {} shapes {}.", words[0], words[1..].join(" ")));
    }
    out.join(" ")
}

/// Engine over the synthetic model and a layered mock universe.
pub fn mock_engine(max_depth: u32, workers: usize) -> Engine {
    let topic = "Coastal geology";
    let providers = Providers::new(
        Arc::new(SyntheticLlm::new(1)),
        Arc::new(LayeredUniverse::new(topic).build(1)),
        Arc::new(HashingEmbedder::default()),
    )
    .with_retry(RetryPolicy::immediate());
    let mut cfg = RunConfig::new(Topic::new(topic).unwrap());
    cfg.max_depth = max_depth;
    cfg.workers = workers;
    Engine::new(providers, cfg).unwrap()
}
