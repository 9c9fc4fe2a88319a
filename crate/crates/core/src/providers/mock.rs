//! Deterministic offline providers.
//!
//! - [`SyntheticLlm`] answers every engine prompt with plausible, parseable
//!   output derived only from the prompt and a seed.
//! - [`ScriptedLlm`] returns canned replies by fingerprint or prompt kind and
//!   can delegate everything else.
//! - [`CorpusSearch`] searches an in-memory document universe;
//!   [`LayeredUniverse`] builds one where each tree level unlocks new pages.
//! - [`HashingEmbedder`] hashes character trigrams into a fixed dimension.

use chrono::{DateTime, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Mutex;

use super::{fingerprint, Embedder, EmbeddingVector, GenerationRequest, SearchEngine, SearchRequest, TextGenerator};
use crate::error::ProviderError;
use crate::model::{normalize_for_match, RetrievedDocument};
use crate::prompts::{self, PromptKind};

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Character-trigram hashing embedder. Counts are non-negative, so cosine
/// similarity between any two texts lies in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    pub const DEFAULT_DIM: usize = 256;

    pub fn new(dim: usize) -> Self {
        assert!(dim > 0);
        Self { dim }
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let padded: Vec<char> = format!(" {} ", text.to_lowercase()).chars().collect();
        let mut v = vec![0.0; self.dim];
        for w in padded.windows(3) {
            let gram: String = w.iter().collect();
            v[(fnv1a(gram.as_bytes()) % self.dim as u64) as usize] += 1.0;
        }
        v
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIM)
    }
}

impl Embedder for HashingEmbedder {
    fn name(&self) -> &str {
        "mock-hashing"
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        texts
            .iter()
            .map(|t| EmbeddingVector::normalized(self.vector(t)))
            .collect()
    }
}

/// Fixed vectors for known texts, hashing for everything else.
#[derive(Debug, Clone, Default)]
pub struct TableEmbedder {
    table: HashMap<String, Vec<f64>>,
    fallback: HashingEmbedder,
}

impl TableEmbedder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, text: impl Into<String>, vector: Vec<f64>) -> Self {
        self.table.insert(text.into(), vector);
        self
    }
}

impl Embedder for TableEmbedder {
    fn name(&self) -> &str {
        "mock-table"
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        texts
            .iter()
            .map(|t| match self.table.get(t) {
                Some(v) => EmbeddingVector::normalized(v.clone()),
                None => EmbeddingVector::normalized(self.fallback.vector(t)),
            })
            .collect()
    }
}

/// A page in a mock search universe.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusDoc {
    pub url: String,
    pub title: String,
    pub content: String,
    /// A query hits this page when it contains every token of one term.
    pub terms: Vec<String>,
}

/// In-memory search over a fixed set of pages. Pages are ranked by how many
/// of their terms the query matches, then by corpus order.
#[derive(Debug, Clone)]
pub struct CorpusSearch {
    docs: Vec<CorpusDoc>,
    fetched_at: DateTime<Utc>,
}

impl CorpusSearch {
    pub fn new(docs: Vec<CorpusDoc>) -> Self {
        Self {
            docs,
            fetched_at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        }
    }

    pub fn docs(&self) -> &[CorpusDoc] {
        &self.docs
    }
}

impl SearchEngine for CorpusSearch {
    fn name(&self) -> &str {
        "mock-corpus"
    }

    fn search(&self, req: &SearchRequest) -> Result<Vec<RetrievedDocument>, ProviderError> {
        let query: Vec<String> = normalize_for_match(&req.query).split(' ').map(str::to_string).collect();
        let mut scored: Vec<(usize, usize)> = self
            .docs
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                let hits = d
                    .terms
                    .iter()
                    .filter(|t| {
                        let toks = normalize_for_match(t);
                        !toks.is_empty() && toks.split(' ').all(|tok| query.iter().any(|q| q == tok))
                    })
                    .count();
                (hits > 0).then_some((hits, i))
            })
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(scored
            .into_iter()
            .take(req.count)
            .map(|(_, i)| {
                let d = &self.docs[i];
                RetrievedDocument::new(&d.url, &d.title, &d.content, &req.query, self.fetched_at)
            })
            .collect())
    }
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "ri", "ven", "tor", "mi", "sa", "quen", "dra", "lu", "pex", "zor", "ni", "bel", "cai", "fen", "go",
    "hal", "iro", "jun", "mar", "nox", "ola", "pri", "rus", "sil", "tam", "urv", "vex",
];

const FILLERS: &[&str] = &[
    "ion", "gel", "map", "rate", "loop", "fold", "core", "bond", "site", "mesh", "grid", "flux", "node", "path",
    "spin", "tide", "wave", "zone", "arc", "axis", "band", "cell", "dose", "gain", "heat", "key", "lens", "mass",
    "net", "orb", "peak", "ray", "seed", "tone", "unit", "vane", "well", "yarn",
];

/// A search universe shaped like a tree of facets: pages about the topic
/// mention first-level facets, pages about a facet mention its sub-facets,
/// and so on for `levels` levels. Each facet is reachable only by a query
/// naming it, so exploring one level deeper unlocks a disjoint set of pages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredUniverse {
    pub topic: String,
    pub levels: usize,
    pub branching: usize,
    pub docs_per_node: usize,
}

impl LayeredUniverse {
    pub fn new(topic: impl Into<String>) -> Self {
        Self {
            topic: topic.into(),
            levels: 3,
            branching: 2,
            docs_per_node: 3,
        }
    }

    pub fn build(&self, seed: u64) -> CorpusSearch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(self.topic.as_bytes()));
        let mut used = std::collections::HashSet::new();
        let mut name = |rng: &mut ChaCha8Rng| loop {
            let n = rng.random_range(2..=3);
            let raw: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
            let mut chars = raw.chars();
            let word = chars.next().unwrap().to_uppercase().chain(chars).collect::<String>();
            if word.len() >= 5 && used.insert(word.clone()) {
                return word;
            }
        };

        // (facet name or None for the topic itself, depth)
        let mut docs = Vec::new();
        let mut frontier: Vec<(Option<String>, usize)> = vec![(None, 0)];
        while let Some((facet, depth)) = frontier.pop() {
            let children: Vec<String> = if depth < self.levels {
                (0..self.branching).map(|_| name(&mut rng)).collect()
            } else {
                Vec::new()
            };
            let subject = facet.clone().unwrap_or_else(|| self.topic.clone());
            for k in 0..self.docs_per_node {
                let fill = |rng: &mut ChaCha8Rng| *FILLERS.choose(rng).unwrap();
                let mut sentences = vec![format!(
                    "The {subject} branch of {} covers {} {} and {} {}.",
                    self.topic,
                    fill(&mut rng),
                    fill(&mut rng),
                    fill(&mut rng),
                    fill(&mut rng)
                )];
                for c in &children {
                    sentences.push(format!(
                        "Work on {c} extends {subject} with {} {}.",
                        fill(&mut rng),
                        fill(&mut rng)
                    ));
                    sentences.push(format!("Reports tie {c} to {} data.", fill(&mut rng)));
                }
                sentences.push(format!(
                    "Source {k} lists {} and {} as open issues.",
                    fill(&mut rng),
                    fill(&mut rng)
                ));
                let slug = normalize_for_match(&subject).replace(' ', "-");
                docs.push(CorpusDoc {
                    url: format!("https://{slug}.example.org/page-{k}"),
                    title: format!("{subject} notes {k}"),
                    content: sentences.join(" "),
                    terms: vec![subject.clone()],
                });
            }
            for c in children.into_iter().rev() {
                frontier.push((Some(c), depth + 1));
            }
        }
        CorpusSearch::new(docs)
    }
}

/// Words that look like names: capitalized, not sentence-initial, at least
/// four letters. Ordered by frequency, then first appearance.
pub fn salient_terms(text: &str, exclude: &[String]) -> Vec<String> {
    let excluded: Vec<String> = exclude
        .iter()
        .flat_map(|e| {
            normalize_for_match(e)
                .split(' ')
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect();
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut sentence_start = true;
    let mut order = 0;
    for raw in text.split_whitespace() {
        let word: String = raw.chars().filter(|c| c.is_alphanumeric()).collect();
        let starts_upper = word.chars().next().is_some_and(char::is_uppercase);
        if !sentence_start
            && starts_upper
            && word.chars().count() >= 4
            && word.chars().all(char::is_alphabetic)
            && !excluded.contains(&word.to_lowercase())
        {
            let e = counts.entry(word).or_insert((0, order));
            e.0 += 1;
            order += 1;
        }
        sentence_start = raw.ends_with(['.', '!', '?', ':']) || raw.starts_with('[') && raw.ends_with(']');
    }
    let mut out: Vec<(String, (usize, usize))> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    out.into_iter().map(|(w, _)| w).collect()
}

fn first_sentence(text: &str) -> &str {
    let t = text.trim();
    let mut end = t.len();
    for (i, c) in t.char_indices() {
        if matches!(c, '.' | '!' | '?') {
            let rest = &t[i + c.len_utf8()..];
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                end = i + c.len_utf8();
                break;
            }
        }
    }
    &t[..end]
}

/// Splits a `[n] title\ncontent` listing back into (title, content) pairs.
fn parse_listing(info: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for line in info.lines() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('[') {
            if let Some((num, title)) = rest.split_once(']') {
                if num.chars().all(|c| c.is_ascii_digit()) && !num.is_empty() {
                    out.push((title.trim().to_string(), String::new()));
                    continue;
                }
            }
        }
        if let Some(last) = out.last_mut() {
            if !trimmed.is_empty() {
                if !last.1.is_empty() {
                    last.1.push(' ');
                }
                last.1.push_str(trimmed);
            }
        }
    }
    out
}

/// Deterministic stand-in for a chat model. Output depends only on the prompt
/// fingerprint and the seed.
#[derive(Debug, Clone)]
pub struct SyntheticLlm {
    seed: u64,
    /// Categories proposed per expansion.
    branching: usize,
    /// Sections the outline polisher may add from the concept list.
    max_added_sections: usize,
}

impl SyntheticLlm {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            branching: 2,
            max_added_sections: 12,
        }
    }

    pub fn with_branching(mut self, branching: usize) -> Self {
        self.branching = branching;
        self
    }

    pub fn with_max_added_sections(mut self, n: usize) -> Self {
        self.max_added_sections = n;
        self
    }

    fn rng(&self, req: &GenerationRequest) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(fingerprint::generation(req).as_bytes()))
    }

    fn expand(&self, prompt: &str) -> String {
        let t = prompts::EXPAND;
        let info = t.extract(prompt, "info").unwrap_or_default();
        let path = t.extract(prompt, "category").unwrap_or_default();
        let exclude: Vec<String> = path.split(" > ").map(str::to_string).collect();
        let terms = salient_terms(info, &exclude);
        if terms.is_empty() {
            let label = exclude.last().cloned().unwrap_or_default();
            return format!("-[Overview]\n--{{{label} overview}}\n");
        }
        terms
            .into_iter()
            .take(self.branching)
            .map(|w| format!("-[{w}]\n--{{{w}}}\n--{{{w} research}}\n"))
            .collect()
    }

    fn reflect(&self, prompt: &str) -> String {
        let info = prompts::REFLECT.extract(prompt, "info").unwrap_or_default();
        let docs = parse_listing(info);
        if docs.is_empty() {
            return "No information was provided.".to_string();
        }
        docs.iter()
            .enumerate()
            .map(|(i, (_, content))| format!("{}. {}", i + 1, first_sentence(content)))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn write_outline(&self, rng: &mut ChaCha8Rng) -> String {
        let mut sections = vec![
            "Overview",
            "History",
            "Key Concepts",
            "Applications",
            "Challenges",
            "Future Directions",
        ];
        // drop one middle section so different seeds give different drafts
        let drop = rng.random_range(1..sections.len() - 1);
        sections.remove(drop);
        let mut out = Vec::new();
        for s in sections {
            out.push(format!("# {s}"));
            if s == "History" {
                out.push("## Origins".to_string());
            }
        }
        out.join("\n")
    }

    fn polish_outline(&self, prompt: &str) -> String {
        let t = prompts::POLISH_OUTLINE;
        let draft = t.extract(prompt, "draft").unwrap_or_default();
        let concepts = t.extract(prompt, "concepts").unwrap_or_default();
        let existing: Vec<String> = draft
            .lines()
            .map(|l| l.trim_start_matches('#').trim().to_string())
            .collect();
        let mut lines: Vec<String> = draft
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect();
        for term in salient_terms(concepts, &existing)
            .into_iter()
            .take(self.max_added_sections)
        {
            lines.push(format!("# {term}"));
        }
        lines.join("\n")
    }

    fn write_section(&self, prompt: &str) -> String {
        let t = prompts::WRITE_SECTION;
        let info = t.extract(prompt, "info").unwrap_or_default();
        let topic = t.extract(prompt, "topic").unwrap_or_default();
        let section = t.extract(prompt, "section").unwrap_or_default();
        let title = section.rsplit(" > ").next().unwrap_or(section);
        let docs = parse_listing(info);
        let mut body = format!("# {title}\n");
        if docs.is_empty() {
            body.push_str(&format!("{title} is an aspect of {topic}."));
        } else {
            let sentences: Vec<String> = docs
                .iter()
                .enumerate()
                .map(|(i, (_, content))| {
                    let s = first_sentence(content);
                    let s = s.strip_suffix('.').unwrap_or(s);
                    format!("{s}.[{}]", i + 1)
                })
                .collect();
            body.push_str(&sentences.join(" "));
        }
        body
    }

    fn polish_article(&self, prompt: &str) -> String {
        let article = prompts::POLISH_ARTICLE.extract(prompt, "article").unwrap_or_default();
        remove_repeated_sentences(article)
    }

    fn decompose(&self, prompt: &str) -> String {
        let text = prompts::DECOMPOSE_FACTS.extract(prompt, "text").unwrap_or_default();
        crate::evaluation::rule_decompose(text)
            .into_iter()
            .map(|f| f.text)
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn equivalence(&self, prompt: &str) -> String {
        let t = prompts::FACT_EQUIVALENCE;
        let known = t.extract(prompt, "known").unwrap_or_default();
        let candidate = normalize_for_match(t.extract(prompt, "candidate").unwrap_or_default());
        for line in known.lines() {
            if let Some((num, fact)) = line.split_once(". ") {
                if normalize_for_match(fact) == candidate {
                    return num.trim().to_string();
                }
            }
        }
        "none".to_string()
    }
}

/// Drops every sentence whose normalized text already appeared earlier in
/// the article. Heading lines are kept verbatim.
pub fn remove_repeated_sentences(article: &str) -> String {
    let mut seen = std::collections::HashSet::new();
    let mut out_lines = Vec::new();
    for line in article.lines() {
        if crate::model::normalize_for_match(line).is_empty() || line.trim_start().starts_with('#') {
            out_lines.push(line.to_string());
            continue;
        }
        let mut kept = Vec::new();
        for (start, end) in crate::evaluation::sentence_spans(line) {
            let sentence = &line[start..end];
            let key = normalize_for_match(&crate::model::rewrite_markers(sentence, |_| None));
            if key.is_empty() || seen.insert(key) {
                kept.push(sentence.trim());
            }
        }
        out_lines.push(kept.join(" "));
    }
    out_lines.join("\n")
}

impl TextGenerator for SyntheticLlm {
    fn name(&self) -> &str {
        "mock-synthetic"
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, ProviderError> {
        let mut rng = self.rng(req);
        let p = &req.prompt;
        Ok(match PromptKind::detect(p) {
            Some(PromptKind::Expand) => self.expand(p),
            Some(PromptKind::Reflect) => self.reflect(p),
            Some(PromptKind::WriteOutline) => self.write_outline(&mut rng),
            Some(PromptKind::PolishOutline) => self.polish_outline(p),
            Some(PromptKind::WriteSection) => self.write_section(p),
            Some(PromptKind::PolishArticle) => self.polish_article(p),
            Some(PromptKind::NeedsExpansion) => "yes".to_string(),
            Some(PromptKind::Sufficiency) => "insufficient".to_string(),
            Some(PromptKind::DecomposeFacts) => self.decompose(p),
            Some(PromptKind::FactEquivalence) => self.equivalence(p),
            None => format!("ack {:016x}", rng.random::<u64>()),
        })
    }
}

/// Canned replies for tests. Lookup order: exact fingerprint, queued replies
/// for the prompt kind (consumed), sticky reply for the kind, fallback
/// provider. Anything else is reported as unavailable.
#[derive(Default)]
pub struct ScriptedLlm {
    by_fingerprint: HashMap<String, String>,
    queued: Mutex<HashMap<PromptKind, VecDeque<Result<String, ProviderError>>>>,
    sticky: HashMap<PromptKind, Result<String, ProviderError>>,
    fallback: Option<Box<dyn TextGenerator>>,
    calls: Mutex<HashMap<Option<PromptKind>, usize>>,
}

impl ScriptedLlm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fallback(mut self, fallback: impl TextGenerator + 'static) -> Self {
        self.fallback = Some(Box::new(fallback));
        self
    }

    pub fn on_fingerprint(mut self, fingerprint: impl Into<String>, reply: impl Into<String>) -> Self {
        self.by_fingerprint.insert(fingerprint.into(), reply.into());
        self
    }

    pub fn queue(self, kind: PromptKind, reply: impl Into<String>) -> Self {
        self.queued
            .lock()
            .unwrap()
            .entry(kind)
            .or_default()
            .push_back(Ok(reply.into()));
        self
    }

    pub fn queue_error(self, kind: PromptKind, err: ProviderError) -> Self {
        self.queued.lock().unwrap().entry(kind).or_default().push_back(Err(err));
        self
    }

    pub fn always(mut self, kind: PromptKind, reply: impl Into<String>) -> Self {
        self.sticky.insert(kind, Ok(reply.into()));
        self
    }

    pub fn always_error(mut self, kind: PromptKind, err: ProviderError) -> Self {
        self.sticky.insert(kind, Err(err));
        self
    }

    /// Number of prompts of `kind` seen so far.
    pub fn calls(&self, kind: PromptKind) -> usize {
        self.calls.lock().unwrap().get(&Some(kind)).copied().unwrap_or(0)
    }
}

impl TextGenerator for ScriptedLlm {
    fn name(&self) -> &str {
        "mock-scripted"
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, ProviderError> {
        let kind = PromptKind::detect(&req.prompt);
        *self.calls.lock().unwrap().entry(kind).or_default() += 1;
        if let Some(reply) = self.by_fingerprint.get(&fingerprint::generation(req)) {
            return Ok(reply.clone());
        }
        if let Some(kind) = kind {
            if let Some(reply) = self.queued.lock().unwrap().get_mut(&kind).and_then(VecDeque::pop_front) {
                return reply;
            }
            if let Some(reply) = self.sticky.get(&kind) {
                return reply.clone();
            }
        }
        match &self.fallback {
            Some(f) => f.generate(req),
            None => Err(ProviderError::Unavailable(format!("no scripted reply for {kind:?}"))),
        }
    }
}
