//! Evaluation reports for generated articles.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use treewrite::evaluation::{self, DiversityReport, Judge};
use treewrite::{parse_article_markup, prose_of, EvaluationError, KdReport, RetrievedDocument};
use treewrite::{Engine, Providers};

use crate::{exit, Failure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub article: String,
    pub kd: KdReport,
    /// Knowledge density of the pre-polish draft, when known.
    pub draft_kd: Option<KdReport>,
    pub sources: usize,
    pub diversity: Option<DiversityReport>,
    /// Why diversity is missing, when it is.
    pub diversity_note: Option<String>,
}

/// KD of prose, with the judge engine when `judge` is set.
pub fn kd_of(prose: &str, judge: Option<&Providers>) -> Result<KdReport, EvaluationError> {
    match judge {
        Some(p) => Judge::new(p).knowledge_density(prose),
        None => evaluation::knowledge_density(prose),
    }
}

/// Diversity over `docs`, or a note explaining why it was skipped.
pub fn diversity_or_note(
    docs: &[RetrievedDocument],
    providers: &Providers,
) -> (Option<DiversityReport>, Option<String>) {
    match evaluation::information_diversity(docs, providers) {
        Ok(d) => (Some(d), None),
        Err(EvaluationError::TooFewDocuments(n)) => (
            None,
            Some(format!("diversity needs at least 2 cited sources, found {n}")),
        ),
        Err(e) => (None, Some(format!("diversity unavailable: {e}"))),
    }
}

pub fn report_for(
    article_name: &str,
    prose: &str,
    draft_prose: Option<&str>,
    sources: &[RetrievedDocument],
    engine: &Engine,
) -> Result<EvalReport, EvaluationError> {
    let judge = engine.options.judge_facts.then_some(&engine.providers);
    let kd = kd_of(prose, judge)?;
    let draft_kd = draft_prose.map(|p| kd_of(p, judge)).transpose()?;
    let (diversity, diversity_note) = diversity_or_note(sources, &engine.providers);
    Ok(EvalReport {
        article: article_name.to_string(),
        kd,
        draft_kd,
        sources: sources.len(),
        diversity,
        diversity_note,
    })
}

/// Path of the report written beside `article`.
pub fn report_path(article: &Path) -> PathBuf {
    let stem = article.file_stem().and_then(|s| s.to_str()).unwrap_or("article");
    article.with_file_name(format!("{stem}.eval.json"))
}

/// Sources of an article file. Uses a sibling `references.json` written by
/// `run` when its urls match; otherwise each reference contributes its
/// title and url as content.
fn sources_for(article: &Path, markup: &treewrite::ArticleMarkup) -> Vec<RetrievedDocument> {
    let stored: BTreeMap<u32, RetrievedDocument> = article
        .parent()
        .map(|d| d.join("references.json"))
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    markup
        .references
        .iter()
        .map(|r| match stored.get(&r.number).filter(|d| d.url == r.url) {
            Some(d) => d.clone(),
            None => RetrievedDocument::new(&r.url, &r.title, format!("{} {}", r.title, r.url), "", chrono_epoch()),
        })
        .collect()
}

fn chrono_epoch() -> treewrite::chrono::DateTime<treewrite::chrono::Utc> {
    treewrite::chrono::DateTime::UNIX_EPOCH
}

/// Evaluates an article markup file and writes `<stem>.eval.json` next to
/// it. Returns the report and where it was written.
pub fn evaluate_file(article: &Path, engine: &Engine) -> Result<(EvalReport, PathBuf), Failure> {
    let text = std::fs::read_to_string(article)
        .map_err(|e| Failure::new(exit::IO, format!("cannot read {}: {e}", article.display())))?;
    let markup = parse_article_markup(&text);
    let prose = prose_of(&markup.body);
    let sources = sources_for(article, &markup);
    let name = article
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("article")
        .to_string();
    let report = report_for(&name, &prose, None, &sources, engine)
        .map_err(|e| Failure::new(exit::IO, format!("cannot evaluate {}: {e}", article.display())))?;
    let out = report_path(article);
    crate::write_json(&out, &report)?;
    Ok((report, out))
}
