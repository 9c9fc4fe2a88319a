//! Knowledge density and information diversity.
//!
//! Two fact engines are available. The rule engine splits text into
//! sentences and then into clauses at coordinating connectives, and treats
//! facts as duplicates when their case-folded, punctuation-free text is
//! equal. It is pure and deterministic. The judge engine asks the language
//! model instead and falls back to the rule engine when the model fails.

use serde::{Deserialize, Serialize};

use crate::error::EvaluationError;
use crate::model::{
    normalize_for_match, word_count, AtomicFact, DedupDecision, DedupMethod, FactEngine, KdReport, RetrievedDocument,
};
use crate::prompts;
use crate::providers::{cosine, EmbeddingVector, GenerationRequest, Providers};

/// Byte spans of the sentences in `text`. A sentence ends at a run of
/// `.`, `!` or `?` followed by whitespace or the end of the text.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    for (start, end) in paragraph_spans(text) {
        sentences_in(text, start, end, &mut spans);
    }
    spans
}

/// Byte ranges separated by blank lines.
fn paragraph_spans(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut offset = 0;
    let mut blank_run = false;
    for line in text.split_inclusive('\n') {
        let blank = line.trim().is_empty();
        if blank && !blank_run && offset > start {
            out.push((start, offset));
        }
        if !blank && blank_run {
            start = offset;
        }
        blank_run = blank;
        offset += line.len();
    }
    if !blank_run && offset > start {
        out.push((start, offset));
    }
    out
}

fn sentences_in(text: &str, from: usize, to: usize, spans: &mut Vec<(usize, usize)>) {
    let mut start = from;
    let mut chars = text[from..to].char_indices().map(|(i, c)| (i + from, c)).peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let mut end = i + c.len_utf8();
        while let Some(&(j, d)) = chars.peek() {
            if matches!(d, '.' | '!' | '?') {
                end = j + d.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        // citation markers glued to the full stop belong to the sentence
        while text[end..to].starts_with('[') {
            match text[end..to].find(']') {
                Some(close) if text[end + 1..end + close].chars().all(|d| d.is_ascii_digit()) && close > 1 => {
                    end += close + 1;
                }
                _ => break,
            }
        }
        let at_boundary = text[end..to].chars().next().is_none_or(char::is_whitespace);
        if at_boundary {
            push_trimmed(text, start, end, spans);
            start = end;
        }
    }
    push_trimmed(text, start, to, spans);
}

fn push_trimmed(text: &str, start: usize, end: usize, out: &mut Vec<(usize, usize)>) {
    let piece = &text[start..end];
    let lead = piece.len() - piece.trim_start().len();
    let trail = piece.len() - piece.trim_end().len();
    if lead + trail < piece.len() {
        out.push((start + lead, end - trail));
    }
}

const CONNECTIVES: [&str; 7] = [", and ", ", but ", ", or ", ", so ", ", yet ", ", nor ", ";"];

/// Splits one sentence into clauses at coordinating connectives and
/// semicolons. Returns byte spans relative to `sentence`.
fn clause_spans(sentence: &str) -> Vec<(usize, usize)> {
    let lower = sentence.to_lowercase();
    // to_lowercase can change byte lengths for some scripts; only split on
    // ASCII connectives when offsets line up
    let haystack = if lower.len() == sentence.len() {
        lower.as_str()
    } else {
        sentence
    };
    let mut cuts: Vec<(usize, usize)> = Vec::new();
    for conn in CONNECTIVES {
        let mut from = 0;
        while let Some(pos) = haystack[from..].find(conn) {
            let at = from + pos;
            cuts.push((at, at + conn.len()));
            from = at + conn.len();
        }
    }
    cuts.sort();
    let mut spans = Vec::new();
    let mut start = 0;
    for (a, b) in cuts {
        if a < start {
            continue;
        }
        spans.push((start, a));
        start = b;
    }
    spans.push((start, sentence.len()));
    spans
}

fn clean_fact(text: &str) -> &str {
    text.trim().trim_end_matches(['.', '!', '?', ';', ',', ':']).trim()
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Rule-engine decomposition. Spans are character offsets into `text`.
pub fn rule_decompose(text: &str) -> Vec<AtomicFact> {
    let mut facts = Vec::new();
    for (s, e) in sentence_spans(text) {
        let sentence = &text[s..e];
        for (a, b) in clause_spans(sentence) {
            let raw = &sentence[a..b];
            let fact = clean_fact(raw);
            if normalize_for_match(fact).is_empty() {
                continue;
            }
            let lead = raw.find(fact).unwrap_or(0);
            let start = s + a + lead;
            let end = start + fact.len();
            facts.push(AtomicFact {
                text: fact.to_string(),
                source_span: (char_offset(text, start), char_offset(text, end)),
            });
        }
    }
    facts
}

/// Rule-engine decomposition with input validation.
pub fn decompose(text: &str) -> Result<Vec<AtomicFact>, EvaluationError> {
    if text.trim().is_empty() {
        return Err(EvaluationError::InvalidText);
    }
    Ok(rule_decompose(text))
}

/// Rule-engine dedup: the first occurrence of each normalized text wins.
pub fn dedupe(facts: &[AtomicFact]) -> (Vec<AtomicFact>, Vec<DedupDecision>) {
    let mut first: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut unique = Vec::new();
    let mut decisions = Vec::with_capacity(facts.len());
    for (i, f) in facts.iter().enumerate() {
        let key = normalize_for_match(&f.text);
        let duplicate_of = match first.get(&key) {
            Some(&j) => Some(j),
            None => {
                first.insert(key, i);
                unique.push(f.clone());
                None
            }
        };
        decisions.push(DedupDecision {
            fact_index: i,
            duplicate_of,
            method: DedupMethod::Rule,
        });
    }
    (unique, decisions)
}

/// Knowledge density with the rule engine for both passes.
pub fn knowledge_density(text: &str) -> Result<KdReport, EvaluationError> {
    let facts = decompose(text)?;
    let (unique, decisions) = dedupe(&facts);
    Ok(report(
        text,
        facts,
        unique.len(),
        decisions,
        FactEngine::Rule,
        FactEngine::Rule,
    ))
}

fn report(
    text: &str,
    facts: Vec<AtomicFact>,
    unique: usize,
    decisions: Vec<DedupDecision>,
    decompose_engine: FactEngine,
    dedupe_engine: FactEngine,
) -> KdReport {
    let words = word_count(text);
    KdReport {
        total_facts: facts.len(),
        unique_facts: unique,
        word_count: words,
        kd: KdReport::density(unique, words),
        decompose_engine,
        dedupe_engine,
        facts,
        decisions,
    }
}

/// LLM-backed fact engine. Judge calls run at temperature zero.
pub struct Judge<'a> {
    providers: &'a Providers,
}

impl<'a> Judge<'a> {
    pub fn new(providers: &'a Providers) -> Self {
        Self { providers }
    }

    fn ask(&self, prompt: String) -> Result<String, crate::error::ProviderError> {
        self.providers.generate(&GenerationRequest::new(prompt, 0.0, 1.0))
    }

    pub fn decompose(&self, text: &str) -> Result<(Vec<AtomicFact>, FactEngine), EvaluationError> {
        if text.trim().is_empty() {
            return Err(EvaluationError::InvalidText);
        }
        let answer = match self.ask(prompts::DECOMPOSE_FACTS.render(&[text])) {
            Ok(a) => a,
            Err(e) => {
                log::warn!("fact decomposition judge failed, using rule engine: {e}");
                return Ok((rule_decompose(text), FactEngine::RuleFallback));
            }
        };
        let lower = text.to_lowercase();
        let same_len = lower.len() == text.len();
        let facts: Vec<AtomicFact> = answer
            .lines()
            .map(|l| l.trim().trim_start_matches(['-', '*', '•']).trim())
            .filter(|l| !normalize_for_match(l).is_empty())
            .map(|l| {
                let needle = clean_fact(l);
                let found = if same_len {
                    lower.find(&needle.to_lowercase())
                } else {
                    text.find(needle)
                };
                let source_span = match found {
                    Some(b) if same_len || text.is_char_boundary(b) => {
                        (char_offset(text, b), char_offset(text, b) + needle.chars().count())
                    }
                    _ => (0, text.chars().count()),
                };
                AtomicFact {
                    text: l.to_string(),
                    source_span,
                }
            })
            .collect();
        if facts.is_empty() {
            log::warn!("fact decomposition judge returned no facts, using rule engine");
            return Ok((rule_decompose(text), FactEngine::RuleFallback));
        }
        Ok((facts, FactEngine::Judge))
    }

    /// Exact repeats are settled by the rule; the model votes on the rest.
    pub fn dedupe(&self, facts: &[AtomicFact]) -> (Vec<AtomicFact>, Vec<DedupDecision>, FactEngine) {
        match self.try_dedupe(facts) {
            Ok((u, d)) => (u, d, FactEngine::Judge),
            Err(e) => {
                log::warn!("fact equivalence judge failed, using rule engine: {e}");
                let (u, d) = dedupe(facts);
                (u, d, FactEngine::RuleFallback)
            }
        }
    }

    fn try_dedupe(&self, facts: &[AtomicFact]) -> Result<(Vec<AtomicFact>, Vec<DedupDecision>), String> {
        let mut unique: Vec<(usize, &AtomicFact)> = Vec::new();
        let mut decisions = Vec::with_capacity(facts.len());
        for (i, f) in facts.iter().enumerate() {
            let key = normalize_for_match(&f.text);
            if let Some((j, _)) = unique.iter().find(|(_, u)| normalize_for_match(&u.text) == key) {
                decisions.push(DedupDecision {
                    fact_index: i,
                    duplicate_of: Some(*j),
                    method: DedupMethod::Rule,
                });
                continue;
            }
            if unique.is_empty() {
                unique.push((i, f));
                decisions.push(DedupDecision {
                    fact_index: i,
                    duplicate_of: None,
                    method: DedupMethod::Judge,
                });
                continue;
            }
            let known = unique
                .iter()
                .enumerate()
                .map(|(n, (_, u))| format!("{}. {}", n + 1, u.text))
                .collect::<Vec<_>>()
                .join("\n");
            let answer = self
                .ask(prompts::FACT_EQUIVALENCE.render(&[&known, &f.text]))
                .map_err(|e| e.to_string())?;
            let duplicate_of = parse_vote(&answer, unique.len())?.map(|n| unique[n - 1].0);
            if duplicate_of.is_none() {
                unique.push((i, f));
            }
            decisions.push(DedupDecision {
                fact_index: i,
                duplicate_of,
                method: DedupMethod::Judge,
            });
        }
        Ok((unique.into_iter().map(|(_, f)| f.clone()).collect(), decisions))
    }

    /// Knowledge density with the judge for both passes.
    pub fn knowledge_density(&self, text: &str) -> Result<KdReport, EvaluationError> {
        let (facts, decompose_engine) = self.decompose(text)?;
        let (unique, decisions, dedupe_engine) = self.dedupe(&facts);
        Ok(report(
            text,
            facts,
            unique.len(),
            decisions,
            decompose_engine,
            dedupe_engine,
        ))
    }
}

/// Parses an equivalence vote: a number in `1..=known` or "none".
fn parse_vote(answer: &str, known: usize) -> Result<Option<usize>, String> {
    let a = answer.trim().to_lowercase();
    if a.starts_with("none") || a.starts_with("no ") || a == "no" {
        return Ok(None);
    }
    let digits: String = a
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(char::is_ascii_digit)
        .collect();
    match digits.parse::<usize>() {
        Ok(n) if (1..=known).contains(&n) => Ok(Some(n)),
        _ => Err(format!("unusable equivalence vote {answer:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub document_count: usize,
    pub mean_pairwise_cosine: f64,
    pub diversity: f64,
}

/// One minus the mean cosine similarity over all unordered pairs.
/// Pair similarities are summed in sorted order so the result does not
/// depend on the order of the input.
pub fn diversity_of(vectors: &[EmbeddingVector]) -> Result<DiversityReport, EvaluationError> {
    let n = vectors.len();
    if n < 2 {
        return Err(EvaluationError::TooFewDocuments(n));
    }
    let mut sims = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            sims.push(cosine(&vectors[i].values, &vectors[j].values));
        }
    }
    sims.sort_by(f64::total_cmp);
    let mean = sims.iter().sum::<f64>() / sims.len() as f64;
    Ok(DiversityReport {
        document_count: n,
        mean_pairwise_cosine: mean,
        diversity: 1.0 - mean,
    })
}

/// Diversity of the documents' content embeddings.
pub fn information_diversity(
    docs: &[RetrievedDocument],
    providers: &Providers,
) -> Result<DiversityReport, EvaluationError> {
    if docs.len() < 2 {
        return Err(EvaluationError::TooFewDocuments(docs.len()));
    }
    let texts: Vec<String> = docs.iter().map(|d| d.content.clone()).collect();
    diversity_of(&providers.embed(&texts)?)
}
