//! Writing the article: retrieve documents per outline section, write each
//! section with positional citations, assemble with global numbering, then
//! run a polish pass that must keep headings and citations intact.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::engine::Engine;
use crate::error::ProviderError;
use crate::model::{
    is_heading_line, markers_in, parse_article_markup, rewrite_markers, Article, ArticleStage, DocId, InformationTree,
    Outline, RetrievedDocument, Section, Topic,
};
use crate::prompts::{self, format_documents};
use crate::providers::{cosine, EmbeddingVector, Providers};

/// Body used when the writer produced nothing.
pub use crate::model::PLACEHOLDER_BODY;

/// Polished text may grow by at most this factor over the draft.
pub const POLISH_GROWTH_LIMIT: f64 = 1.1;

const EMBED_BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionQuery {
    pub heading_path: Vec<String>,
    pub query_text: String,
}

impl SectionQuery {
    /// Panics on an empty path.
    pub fn new(heading_path: Vec<String>) -> Self {
        assert!(!heading_path.is_empty(), "section query needs a heading");
        let query_text = heading_path.join(" > ");
        Self {
            heading_path,
            query_text,
        }
    }
}

/// Content embeddings of every document in a tree, in ascending id order.
#[derive(Debug, Clone, Default)]
pub struct DocumentIndex {
    ids: Vec<DocId>,
    vectors: Vec<EmbeddingVector>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    idx: usize,
}

impl Ord for Candidate {
    /// Greater means ranked earlier: higher score, then lower doc id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl DocumentIndex {
    pub fn build(providers: &Providers, tree: &InformationTree) -> Result<Self, ProviderError> {
        let ids: Vec<DocId> = tree.documents.keys().cloned().collect();
        let texts: Vec<String> = tree.documents.values().map(|d| d.content.clone()).collect();
        let mut vectors = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(EMBED_BATCH) {
            vectors.extend(providers.embed(chunk)?);
        }
        Ok(Self { ids, vectors })
    }

    pub fn from_parts(ids: Vec<DocId>, vectors: Vec<EmbeddingVector>) -> Self {
        assert_eq!(ids.len(), vectors.len());
        Self { ids, vectors }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// The `k` best documents for `query` by cosine, best first; ties go to
    /// the lower doc id.
    pub fn top_k(&self, query: &[f64], k: usize) -> Vec<(DocId, f64)> {
        let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::with_capacity(k + 1);
        for (idx, v) in self.vectors.iter().enumerate() {
            heap.push(Reverse(Candidate {
                score: cosine(query, &v.values),
                idx,
            }));
            if heap.len() > k {
                heap.pop();
            }
        }
        let mut best: Vec<Candidate> = heap.into_iter().map(|Reverse(c)| c).collect();
        best.sort_by(|a, b| b.cmp(a));
        best.into_iter().map(|c| (self.ids[c.idx].clone(), c.score)).collect()
    }
}

/// Top-`k` tree documents for a section, across all nodes.
pub fn retrieve_for_section(
    providers: &Providers,
    index: &DocumentIndex,
    tree: &InformationTree,
    q: &SectionQuery,
    k: usize,
) -> Result<Vec<RetrievedDocument>, ProviderError> {
    if index.is_empty() || k == 0 {
        return Ok(Vec::new());
    }
    let query = providers.embed(std::slice::from_ref(&q.query_text))?;
    Ok(index
        .top_k(&query[0].values, k)
        .into_iter()
        .map(|(id, _)| tree.documents[&id].clone())
        .collect())
}

fn heading_for(path: &[String]) -> String {
    format!(
        "{} {}",
        "#".repeat(path.len().max(1)),
        path.last().map(String::as_str).unwrap_or_default()
    )
}

/// Writes one section from `docs`. Marker `[n]` refers to `docs[n-1]`;
/// markers past the end are removed. The body always starts with the
/// section's canonical heading line, and other heading lines are dropped.
pub fn write_section(engine: &Engine, topic: &Topic, q: &SectionQuery, docs: &[RetrievedDocument]) -> Section {
    let heading = heading_for(&q.heading_path);
    let prompt = prompts::WRITE_SECTION.render(&[&format_documents(docs), topic.as_str(), &q.query_text]);
    let raw = match engine.generate(prompt) {
        Ok(t) => t,
        Err(e) => {
            engine.warn(format!("section {:?}: writer failed: {e}", q.query_text));
            String::new()
        }
    };
    let text: Vec<&str> = raw.lines().filter(|l| !is_heading_line(l)).collect();
    let text = text.join("\n");
    let mut stripped = Vec::new();
    let text = rewrite_markers(&text, |n| {
        if n >= 1 && (n as usize) <= docs.len() {
            Some(n)
        } else {
            stripped.push(n);
            None
        }
    });
    if !stripped.is_empty() {
        engine.warn(format!(
            "section {:?}: removed out-of-range markers {stripped:?}",
            q.query_text
        ));
    }
    let text = text.trim();
    if text.is_empty() {
        return Section {
            heading_path: q.heading_path.clone(),
            body: format!("{heading}\n{PLACEHOLDER_BODY}"),
            local_citations: BTreeMap::new(),
        };
    }
    let local_citations = markers_in(text)
        .into_iter()
        .map(|n| (n, docs[n as usize - 1].doc_id.clone()))
        .collect();
    Section {
        heading_path: q.heading_path.clone(),
        body: format!("{heading}\n{text}"),
        local_citations,
    }
}

/// Concatenates sections and renumbers citations globally by first
/// appearance. The bibliography holds each cited document once.
pub fn assemble(topic: &Topic, sections: Vec<Section>, tree: &InformationTree) -> Article {
    let mut global: HashMap<DocId, u32> = HashMap::new();
    let mut bibliography = BTreeMap::new();
    let mut out = Vec::with_capacity(sections.len());
    for s in sections {
        let mut local = BTreeMap::new();
        let body = rewrite_markers(&s.body, |n| {
            let doc = s.local_citations.get(&n)?;
            let stored = tree.documents.get(doc)?;
            let next = global.len() as u32 + 1;
            let g = *global.entry(doc.clone()).or_insert(next);
            bibliography.entry(g).or_insert_with(|| stored.clone());
            local.insert(g, doc.clone());
            Some(g)
        });
        out.push(Section {
            heading_path: s.heading_path,
            body,
            local_citations: local,
        });
    }
    Article {
        topic: topic.clone(),
        sections: out,
        bibliography,
        stage: ArticleStage::Draft,
    }
}

/// Retrieves and writes every outline section on the worker pool, then
/// assembles in outline order.
pub fn compose(engine: &Engine, outline: &Outline, tree: &InformationTree) -> Article {
    let index = DocumentIndex::build(&engine.providers, tree).unwrap_or_else(|e| {
        engine.warn(format!("could not embed tree documents, sections get no sources: {e}"));
        DocumentIndex::default()
    });
    let queries: Vec<SectionQuery> = outline.heading_paths().into_iter().map(SectionQuery::new).collect();
    let k = engine.config.section_retrieve_count;
    let topic = &engine.config.topic;
    let sections = engine.par_map(&queries, |q| {
        let docs = retrieve_for_section(&engine.providers, &index, tree, q, k).unwrap_or_else(|e| {
            engine.warn(format!("retrieval for {:?} failed: {e}", q.query_text));
            Vec::new()
        });
        write_section(engine, topic, q, &docs)
    });
    assemble(topic, sections, tree)
}

/// Splits polished text into sections at heading lines. Text before the
/// first heading is dropped.
fn split_sections(text: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        if is_heading_line(line) {
            out.push((line.trim().to_string(), String::new()));
        } else if let Some((_, body)) = out.last_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    out
}

fn canonical_heading(line: &str) -> String {
    let t = line.trim();
    let hashes = t.chars().take_while(|c| *c == '#').count();
    format!("{} {}", &t[..hashes], crate::model::normalize_for_match(&t[hashes..]))
}

/// Rebuilds the draft's sections from polished text, or `None` when the
/// heading sequence changed.
fn reparse(draft: &Article, text: &str) -> Option<Vec<Section>> {
    let body = parse_article_markup(text).body;
    let parts = split_sections(&body);
    if parts.len() != draft.sections.len() {
        return None;
    }
    let mut out = Vec::with_capacity(parts.len());
    for ((heading, body), s) in parts.into_iter().zip(&draft.sections) {
        if canonical_heading(&heading) != canonical_heading(&s.heading_line()) {
            return None;
        }
        let body = body.trim();
        let body = if body.is_empty() { PLACEHOLDER_BODY } else { body };
        out.push(Section {
            heading_path: s.heading_path.clone(),
            body: format!("{}\n{body}", s.heading_line()),
            local_citations: BTreeMap::new(),
        });
    }
    Some(out)
}

/// Makes the citation invariants hold again after an edit: unknown markers
/// are removed, uncited entries are pruned and the rest renumbered `1..B`
/// in ascending order of their old numbers.
pub fn reconcile_citations(
    sections: Vec<Section>,
    bibliography: &BTreeMap<u32, RetrievedDocument>,
) -> (Vec<Section>, BTreeMap<u32, RetrievedDocument>, Vec<String>) {
    let mut notes = Vec::new();
    let mut unknown = Vec::new();
    let sections: Vec<Section> = sections
        .into_iter()
        .map(|s| {
            let body = rewrite_markers(&s.body, |n| {
                if bibliography.contains_key(&n) {
                    Some(n)
                } else {
                    unknown.push(n);
                    None
                }
            });
            Section { body, ..s }
        })
        .collect();
    if !unknown.is_empty() {
        notes.push(format!("removed markers with no bibliography entry: {unknown:?}"));
    }
    let used: std::collections::BTreeSet<u32> = sections.iter().flat_map(|s| s.markers()).collect();
    let dropped: Vec<u32> = bibliography.keys().filter(|n| !used.contains(n)).copied().collect();
    if !dropped.is_empty() {
        notes.push(format!("pruned bibliography entries no longer cited: {dropped:?}"));
    }
    let renumber: BTreeMap<u32, u32> = used.iter().enumerate().map(|(i, old)| (*old, i as u32 + 1)).collect();
    let new_bib: BTreeMap<u32, RetrievedDocument> = renumber
        .iter()
        .map(|(old, new)| (*new, bibliography[old].clone()))
        .collect();
    let sections = sections
        .into_iter()
        .map(|s| {
            let body = rewrite_markers(&s.body, |n| renumber.get(&n).copied());
            let local_citations = markers_in(&body)
                .into_iter()
                .map(|n| (n, new_bib[&n].doc_id.clone()))
                .collect();
            Section {
                body,
                local_citations,
                ..s
            }
        })
        .collect();
    (sections, new_bib, notes)
}

/// Editing pass over the draft. Falls back to the draft (restamped as
/// polished) when the heading structure changes twice or the text grows by
/// more than [`POLISH_GROWTH_LIMIT`].
pub fn polish_article(engine: &Engine, draft: &Article) -> Article {
    let fallback = || Article {
        stage: ArticleStage::Polished,
        ..draft.clone()
    };
    let prompt = prompts::POLISH_ARTICLE.render(&[&draft.body_text()]);
    let mut sections = None;
    for n in 1..=2 {
        match engine.generate(prompt.clone()) {
            Ok(text) => match reparse(draft, &text) {
                Some(s) => {
                    sections = Some(s);
                    break;
                }
                None => engine.warn(format!("article polish attempt {n} changed the heading structure")),
            },
            Err(e) => engine.warn(format!("article polish attempt {n} failed: {e}")),
        }
    }
    let Some(sections) = sections else {
        engine.warn("article polish unusable; keeping the draft");
        return fallback();
    };
    let (sections, bibliography, notes) = reconcile_citations(sections, &draft.bibliography);
    for n in notes {
        engine.warn(format!("article polish: {n}"));
    }
    let polished = Article {
        topic: draft.topic.clone(),
        sections,
        bibliography,
        stage: ArticleStage::Polished,
    };
    let (before, after) = (draft.word_count(), polished.word_count());
    if after as f64 > before as f64 * POLISH_GROWTH_LIMIT {
        engine.warn(format!(
            "article polish grew the text from {before} to {after} words; keeping the draft"
        ));
        return fallback();
    }
    polished
}
