//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed; a failure makes the
//! process exit nonzero.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treewrite::acquisition::{acquire, acquire_with, AcquisitionState};
use treewrite::composition::{compose, polish_article, retrieve_for_section, DocumentIndex, SectionQuery};
use treewrite::evaluation::{diversity_of, information_diversity, knowledge_density};
use treewrite::outline::{draft_outline, polish_outline};
use treewrite::prompts::PromptKind;
use treewrite::providers::cassette::CassetteMode;
use treewrite::providers::http::{CountingTransport, Transport, UnreachableTransport};
use treewrite::providers::mock::{
    CorpusSearch, HashingEmbedder, LayeredUniverse, ScriptedLlm, SyntheticLlm, TableEmbedder,
};
use treewrite::providers::{EmbeddingVector, GenerationRequest, Providers, RetryPolicy, TextGenerator};
use treewrite::{
    validate_tree, Article, ArticleStage, DocId, Engine, Heading, InformationTree, Outline, RetrievedDocument,
    RunConfig, Section, Topic,
};
use treewrite_cli::exit;
use treewrite_cli::pipeline::{self, RunOutcome, RunStatus};
use treewrite_cli::settings::{ProviderKind, Settings};
use treewrite_cli::sweep::depth_sweep;
use treewrite_cli::wiring::{self, Wired};

const TOPIC: &str = "Coral reefs";
const CONTENT_ARTIFACTS: [&str; 7] = [
    "tree.json",
    "concepts.json",
    "outline.md",
    "article-draft.md",
    "article.md",
    "references.json",
    "eval-report.json",
];

fn topic() -> Topic {
    Topic::new(TOPIC).unwrap()
}

fn settings_in(dir: &Path, max_depth: u32) -> Settings {
    let mut s = Settings::mock(topic());
    s.output_dir = dir.to_path_buf();
    s.config.max_depth = max_depth;
    s
}

fn mock_providers(llm: impl TextGenerator + 'static, seed: u64) -> Providers {
    let universe = LayeredUniverse::new(TOPIC).build(seed);
    Providers::new(Arc::new(llm), Arc::new(universe), Arc::new(HashingEmbedder::default()))
        .with_retry(RetryPolicy::immediate())
}

fn engine_with(providers: Providers, max_depth: u32) -> Engine {
    let mut cfg = RunConfig::new(topic());
    cfg.max_depth = max_depth;
    Engine::new(providers, cfg).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

/// Acquire, outline, compose and polish with `engine`.
fn full_article(engine: &Engine) -> (Article, Article) {
    let state = acquire(engine).unwrap();
    let draft_outline = draft_outline(engine).unwrap();
    let outline = polish_outline(engine, &draft_outline, &state.pool);
    let draft = compose(engine, &outline, &state.tree);
    let polished = polish_article(engine, &draft);
    (draft, polished)
}

/// Marker set, bibliography keys and `1..=B` must coincide.
fn citations_sound(article: &Article) -> Result<(), String> {
    let markers: std::collections::BTreeSet<u32> = article.markers().into_iter().collect();
    let keys: std::collections::BTreeSet<u32> = article.bibliography.keys().copied().collect();
    let expected: std::collections::BTreeSet<u32> = (1..=keys.len() as u32).collect();
    if markers != keys || keys != expected {
        return Err(format!("markers {markers:?}, keys {keys:?}"));
    }
    let violations = article.citation_violations();
    if !violations.is_empty() {
        return Err(violations.join("; "));
    }
    Ok(())
}

// 1

fn determinism() -> String {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let settings = settings_in(dir.path(), 2);
        assert_eq!(settings.mock.branching, 2);
        let wired = wiring::build(&settings).unwrap();
        let out = pipeline::run(&settings, &wired).unwrap();
        assert_eq!(out.manifest.status, RunStatus::Ok, "{:?}", out.manifest.failure);
        runs.push(out);
    }
    let elapsed = started.elapsed();
    for name in ["tree.json", "concepts.json", "outline.md", "article.md"] {
        assert_eq!(
            read(&runs[0].dir, name),
            read(&runs[1].dir, name),
            "{name} differs between runs"
        );
    }
    assert!(elapsed < Duration::from_secs(10), "two runs took {elapsed:?}");
    format!(
        "tree, concepts, outline, article identical; {} ms for two runs",
        elapsed.as_millis()
    )
}

// 2

fn acquisition_structure() -> String {
    let mut notes = Vec::new();
    for k in 1..=3u32 {
        let llm = ScriptedLlm::new()
            .always(PromptKind::NeedsExpansion, "yes")
            .with_fallback(SyntheticLlm::new(7).with_branching(2));
        let engine = engine_with(mock_providers(llm, 7), k);
        let mut seen: Vec<(u32, u32, u32, usize)> = Vec::new();
        let state = acquire_with(&engine, &mut |s: &AcquisitionState| {
            seen.push((s.step, s.tree.revision, s.pool.revision, s.pool.len()));
        })
        .unwrap();
        let violations = validate_tree(&state.tree);
        assert!(violations.is_empty(), "K={k}: {violations:?}");
        let deepest = state.tree.nodes.values().map(|n| n.depth).max().unwrap();
        assert!(deepest <= k, "K={k}: depth {deepest}");
        assert!(deepest >= 1, "K={k}: tree never grew");
        for (step, tree_rev, pool_rev, _) in &seen {
            assert_eq!(tree_rev, pool_rev, "K={k} step {step}: revisions out of lockstep");
        }
        for w in seen.windows(2) {
            assert!(w[1].3 >= w[0].3, "K={k}: pool shrank from {} to {}", w[0].3, w[1].3);
            assert_eq!(w[1].0, w[0].0 + 1);
        }
        assert!(seen.len() as u32 <= k + 1);
        notes.push(format!("K={k}: {} nodes, depth {deepest}", state.tree.nodes.len()));
    }
    notes.join(", ")
}

// 3

const VOCAB: [&str; 24] = [
    "coral", "reef", "algae", "polyp", "tide", "current", "sponge", "fish", "bleach", "heat", "storm", "sand",
    "lagoon", "atoll", "kelp", "urchin", "shell", "larva", "light", "depth", "salt", "wave", "shore", "plankton",
];

fn random_text(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    dot / (na * nb).sqrt()
}

fn retrieval_oracle() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let when = treewrite::chrono::DateTime::UNIX_EPOCH;
    let mut docs = Vec::new();
    for i in 0..100 {
        // every tenth page copies an earlier page's text to force exact ties
        let content = if i % 10 == 9 {
            let prev: &RetrievedDocument = &docs[i - 5];
            prev.content.clone()
        } else {
            random_text(&mut rng, 12)
        };
        docs.push(RetrievedDocument::new(
            format!("https://mock{i:03}.example/p"),
            format!("doc {i}"),
            content,
            "",
            when,
        ));
    }
    let tree = InformationTree::with_root(TOPIC, vec![TOPIC.into()], docs.clone(), 1);
    let providers = Providers::new(
        Arc::new(ScriptedLlm::new()),
        Arc::new(CorpusSearch::new(Vec::new())),
        Arc::new(HashingEmbedder::default()),
    );
    let index = DocumentIndex::build(&providers, &tree).unwrap();
    let mut checked = 0;
    for q in 0..10 {
        let path = vec![random_text(&mut rng, 2), random_text(&mut rng, 3)];
        let query = SectionQuery::new(path);
        let qv = providers
            .embed(std::slice::from_ref(&query.query_text))
            .unwrap()
            .remove(0);
        let mut scored: Vec<(f64, DocId)> = docs
            .iter()
            .map(|d| {
                let v = providers.embed(std::slice::from_ref(&d.content)).unwrap().remove(0);
                (oracle_cosine(&qv.values, &v.values), d.doc_id.clone())
            })
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
        for k in [1usize, 3, 10] {
            let got: Vec<DocId> = retrieve_for_section(&providers, &index, &tree, &query, k)
                .unwrap()
                .into_iter()
                .map(|d| d.doc_id)
                .collect();
            let want: Vec<DocId> = scored.iter().take(k).map(|(_, id)| id.clone()).collect();
            assert_eq!(got, want, "query {q} k={k}");
            checked += 1;
        }
    }
    format!("{checked} rankings match brute force")
}

// 4

const KD_SENTENCES: [&str; 7] = [
    "Coral polyps build reef skeletons from calcium carbonate drawn out of the surrounding seawater.",
    "Warm shallow water near the equator supports the fastest rates of new reef growth.",
    "Symbiotic algae living inside coral tissue supply most of the energy the polyps need.",
    "Rising ocean temperatures cause bleaching when corals expel their algae under prolonged heat stress.",
    "Parrotfish graze on algae across the reef flat which keeps the coral surfaces clear.",
    "Storm waves can break branching corals into fragments that sometimes settle and grow again.",
    "Marine protected areas limit fishing pressure on reefs that support many local coastal communities.",
];

fn kd_formula() -> String {
    let mut sentences: Vec<&str> = KD_SENTENCES.to_vec();
    sentences.extend([KD_SENTENCES[0], KD_SENTENCES[2], KD_SENTENCES[4]]);
    let text = sentences.join(" ");
    assert_eq!(text.split_whitespace().count(), 140, "fixture drifted");
    let r = knowledge_density(&text).unwrap();
    assert_eq!(r.total_facts, 10);
    assert_eq!(r.unique_facts, 7);
    assert_eq!(r.word_count, 140);
    assert_eq!(r.kd, 50.0);
    format!("total {}, unique {}, kd {}", r.total_facts, r.unique_facts, r.kd)
}

// 5

fn kd_under_polish() -> String {
    let when = treewrite::chrono::DateTime::UNIX_EPOCH;
    let a = RetrievedDocument::new("https://a.example/1", "A", "Reef text.", "q", when);
    let b = RetrievedDocument::new("https://b.example/1", "B", "Algae text.", "q", when);
    let body = "# Growth\nCoral polyps build skeletons from calcium carbonate.[1] \
                Warm shallow water speeds reef growth.[2] \
                Coral polyps build skeletons from calcium carbonate.[1]";
    let section = Section {
        heading_path: vec!["Growth".into()],
        body: body.into(),
        local_citations: BTreeMap::from([(1, a.doc_id.clone()), (2, b.doc_id.clone())]),
    };
    let draft = Article {
        topic: topic(),
        sections: vec![section],
        bibliography: BTreeMap::from([(1, a), (2, b)]),
        stage: ArticleStage::Draft,
    };
    // the synthetic editor drops repeated sentences
    let llm = ScriptedLlm::new().with_fallback(SyntheticLlm::new(0));
    let engine = engine_with(mock_providers(llm, 0), 1);
    let polished = polish_article(&engine, &draft);
    assert_eq!(polished.stage, ArticleStage::Polished);
    let before = knowledge_density(&draft.prose()).unwrap().kd;
    let after = knowledge_density(&polished.prose()).unwrap().kd;
    assert!(after > before, "kd {before} -> {after}");
    citations_sound(&polished).unwrap();
    format!("kd {before:.3} -> {after:.3}")
}

// 6

/// Delegates to the synthetic model but plants a citation to nothing in
/// every polished article.
struct MarkerVandal(SyntheticLlm);

impl TextGenerator for MarkerVandal {
    fn name(&self) -> &str {
        "mock-vandal"
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, treewrite::ProviderError> {
        let out = self.0.generate(req)?;
        match PromptKind::detect(&req.prompt) {
            Some(PromptKind::PolishArticle) => Ok(out.replacen('.', ".[42]", 1)),
            _ => Ok(out),
        }
    }
}

fn citation_soundness() -> String {
    let mut runs = 0;
    for seed in 0..3u64 {
        for depth in 1..=2u32 {
            let engine = engine_with(mock_providers(SyntheticLlm::new(seed), seed), depth);
            let (draft, polished) = full_article(&engine);
            citations_sound(&draft)
                .map_err(|e| format!("draft seed {seed}: {e}"))
                .unwrap();
            citations_sound(&polished)
                .map_err(|e| format!("seed {seed} depth {depth}: {e}"))
                .unwrap();
            runs += 1;
        }
    }
    let adversarial_sections = [
        "First claim.[1] Second claim.[7] Third claim.[0][2] Stray.[99]",
        "# Fake heading\nOnly out of range.[5][6]",
        "Nothing cited at all.",
        "[3] Leading marker. Repeated [1][1][1].",
    ];
    for (i, reply) in adversarial_sections.iter().enumerate() {
        let llm = ScriptedLlm::new()
            .always(PromptKind::WriteSection, *reply)
            .with_fallback(MarkerVandal(SyntheticLlm::new(i as u64)));
        let engine = engine_with(mock_providers(llm, i as u64), 2);
        let (_, polished) = full_article(&engine);
        citations_sound(&polished)
            .map_err(|e| format!("adversarial {i}: {e}"))
            .unwrap();
        runs += 1;
    }
    let llm = MarkerVandal(SyntheticLlm::new(5));
    let engine = engine_with(mock_providers(llm, 5), 2);
    let (_, polished) = full_article(&engine);
    citations_sound(&polished).unwrap();
    runs += 1;
    format!(
        "{runs} runs sound, including {} adversarial",
        adversarial_sections.len() + 1
    )
}

// 7

fn diversity_metric() -> String {
    let when = treewrite::chrono::DateTime::UNIX_EPOCH;
    let doc = |url: &str, content: &str| RetrievedDocument::new(url, url, content, "q", when);
    let providers = |embedder: TableEmbedder| {
        Providers::new(
            Arc::new(ScriptedLlm::new()),
            Arc::new(CorpusSearch::new(Vec::new())),
            Arc::new(embedder),
        )
    };

    let same = providers(TableEmbedder::new());
    let d = information_diversity(&[doc("https://x/1", "one text"), doc("https://x/2", "one text")], &same).unwrap();
    assert_eq!(d.diversity, 0.0);

    let orth = providers(
        TableEmbedder::new()
            .with("east", vec![1.0, 0.0, 0.0])
            .with("north", vec![0.0, 1.0, 0.0]),
    );
    let o = information_diversity(&[doc("https://x/1", "east"), doc("https://x/2", "north")], &orth).unwrap();
    assert_eq!(o.diversity, 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vectors: Vec<EmbeddingVector> = (0..10)
        .map(|_| EmbeddingVector::normalized((0..16).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
        .collect();
    let mut sum = 0.0;
    let mut pairs = 0;
    for i in 0..vectors.len() {
        for j in 0..vectors.len() {
            if i < j {
                sum += oracle_cosine(&vectors[i].values, &vectors[j].values);
                pairs += 1;
            }
        }
    }
    let want = 1.0 - sum / pairs as f64;
    let got = diversity_of(&vectors).unwrap().diversity;
    assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    format!(
        "identical {}, orthogonal {}, random |diff| {:.1e}",
        d.diversity,
        o.diversity,
        (got - want).abs()
    )
}

// 8

fn sweep_shape() -> String {
    let dir = tempfile::tempdir().unwrap();
    let settings = settings_in(dir.path(), 1);
    assert!(settings.mock.levels >= 3);
    let wired = wiring::build(&settings).unwrap();
    let rows = depth_sweep(&settings, &wired, &[1, 2, 3, 4]).unwrap();
    let div: Vec<f64> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.status, "ok");
            r.diversity.expect("diversity")
        })
        .collect();
    for w in div.windows(2) {
        assert!(w[1] >= w[0], "diversity fell: {div:?}");
    }
    let (early, late) = (div[1] - div[0], div[3] - div[2]);
    assert!(late < early, "3->4 gain {late} not below 1->2 gain {early}");
    format!(
        "diversity {}",
        div.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(" / ")
    )
}

// 9

fn adversarial_outline(rng: &mut ChaCha8Rng, case: usize) -> String {
    let mut lines = Vec::new();
    let n = rng.random_range(1..12);
    for j in 0..n {
        let line = match rng.random_range(0..12) {
            0 => format!("# {TOPIC}"),
            1 => format!("##   {}  ", TOPIC.to_uppercase()),
            2 => "lorem ipsum dolor 42".to_string(),
            3 => String::new(),
            4 => "- a bullet that is not a heading".to_string(),
            5 => "#NoSpace".to_string(),
            6 => "######".to_string(),
            7 => format!("## Ökologie {j} ✓\r"),
            8 => format!("{} Deep jump {j}", "#".repeat(rng.random_range(3..9))),
            9 => "```".to_string(),
            _ => format!("{} Section {case}.{j}", "#".repeat(rng.random_range(1..4))),
        };
        lines.push(line);
    }
    let at = rng.random_range(0..=lines.len());
    lines.insert(at, format!("{} Anchor {case}", "#".repeat(rng.random_range(1..6))));
    lines.join("\n")
}

fn check_outline_file(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut headings = Vec::new();
    let mut prev = 0u32;
    for line in text.lines() {
        let hashes = line.chars().take_while(|c| *c == '#').count() as u32;
        assert!(
            hashes >= 1 && line[hashes as usize..].starts_with(' '),
            "not a heading: {line:?}"
        );
        assert!(hashes <= prev + 1, "level jump at {line:?}");
        let title = line[hashes as usize + 1..].to_string();
        assert!(!title.trim().is_empty());
        prev = hashes;
        headings.push(Heading::new(hashes, title));
    }
    let outline = Outline::new(topic(), headings);
    assert!(outline.is_ok(), "{}: {:?}", path.display(), outline.err());
}

fn outline_robustness() -> String {
    let dir = tempfile::tempdir().unwrap();
    let settings = settings_in(dir.path(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let draft = adversarial_outline(&mut rng, case);
        let polish = adversarial_outline(&mut rng, case + 1000);
        let llm = ScriptedLlm::new()
            .queue(PromptKind::WriteOutline, draft)
            .queue(PromptKind::PolishOutline, polish)
            .with_fallback(SyntheticLlm::new(case as u64));
        let wired = Wired {
            providers: mock_providers(llm, 1),
            cassette: None,
        };
        let out = pipeline::run(&settings, &wired).unwrap();
        assert_eq!(
            out.manifest.status,
            RunStatus::Ok,
            "case {case}: {:?}",
            out.manifest.failure
        );
        check_outline_file(&out.dir.join("outline.md"));
    }

    let llm = ScriptedLlm::new()
        .always(PromptKind::WriteOutline, "no headings here\njust prose")
        .with_fallback(SyntheticLlm::new(0));
    let wired = Wired {
        providers: mock_providers(llm, 1),
        cassette: None,
    };
    let out = pipeline::run(&settings, &wired).unwrap();
    assert_eq!(out.manifest.status, RunStatus::Failed);
    assert_eq!(out.manifest.exit_code(), exit::STAGE_ABORT);
    let failure = out.manifest.failure.as_ref().unwrap();
    assert_eq!(failure.stage, "outline");
    assert!(out.manifest.artifacts.contains_key("tree") && !out.manifest.artifacts.contains_key("article"));
    assert!(out.dir.join("manifest.json").is_file());
    format!(
        "200 adversarial outlines clean; empty outline exits {}",
        out.manifest.exit_code()
    )
}

// 10

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

fn replay(cassette: &Path, out_dir: &Path) -> (RunOutcome, usize) {
    let mut settings = settings_in(out_dir, 2);
    settings.provider = ProviderKind::Http;
    settings.cassette = Some((cassette.to_path_buf(), CassetteMode::Replay));
    let counter = Arc::new(CountingTransport::new(Arc::new(UnreachableTransport)));
    let transport: Arc<dyn Transport> = counter.clone();
    let wired = wiring::build_with_transport(&settings, Some(transport)).unwrap();
    let out = pipeline::run(&settings, &wired).unwrap();
    (out, counter.calls())
}

fn record(cassette: &Path, out_dir: &Path) -> RunOutcome {
    let mut settings = settings_in(out_dir, 2);
    settings.cassette = Some((cassette.to_path_buf(), CassetteMode::Record));
    let wired = wiring::build(&settings).unwrap();
    let out = pipeline::run(&settings, &wired).unwrap();
    assert_eq!(out.manifest.status, RunStatus::Ok, "{:?}", out.manifest.failure);
    out
}

fn replay_isolation() -> String {
    let golden = golden_dir();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&golden).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let out = record(&golden.join("cassette.json"), tmp.path());
        for name in CONTENT_ARTIFACTS {
            std::fs::copy(out.dir.join(name), golden.join(name)).unwrap();
        }
    }

    // fresh record then replay
    let tmp = tempfile::tempdir().unwrap();
    let cassette = tmp.path().join("cassette.json");
    let recorded = record(&cassette, tmp.path());
    let (replayed, calls) = replay(&cassette, tmp.path());
    assert_eq!(
        replayed.manifest.status,
        RunStatus::Ok,
        "{:?}",
        replayed.manifest.failure
    );
    assert_eq!(calls, 0, "replay touched the transport");
    for name in CONTENT_ARTIFACTS {
        assert_eq!(
            read(&recorded.dir, name),
            read(&replayed.dir, name),
            "{name} differs after replay"
        );
    }

    // committed golden cassette and artifacts
    let (out, calls) = replay(&golden.join("cassette.json"), tmp.path());
    assert_eq!(out.manifest.status, RunStatus::Ok, "{:?}", out.manifest.failure);
    assert_eq!(calls, 0);
    for name in CONTENT_ARTIFACTS {
        assert_eq!(read(&golden, name), read(&out.dir, name), "{name} differs from golden");
    }
    format!(
        "0 transport calls; {} artifacts byte-exact against recording and golden set",
        CONTENT_ARTIFACTS.len()
    )
}

type Criterion = (&'static str, fn() -> String);

fn main() {
    let criteria: [Criterion; 10] = [
        ("pipeline determinism", determinism),
        ("acquisition tree structure", acquisition_structure),
        ("retrieval matches brute-force oracle", retrieval_oracle),
        ("knowledge density formula", kd_formula),
        ("knowledge density rises under polish", kd_under_polish),
        ("citation soundness", citation_soundness),
        ("diversity metric", diversity_metric),
        ("depth sweep shape", sweep_shape),
        ("outline robustness", outline_robustness),
        ("cassette replay isolation", replay_isolation),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {:>2} {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", criteria.len(), criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
