//! Draft outline from the topic alone, then a polish pass informed by the
//! concept pool.

use crate::engine::Engine;
use crate::error::{OutlineError, ProviderError};
use crate::model::{parse_outline, render_outline, ConceptPool, Outline, ParsedOutline};
use crate::prompts::{self, format_concepts};

fn attempt(engine: &Engine, prompt: &str) -> Result<ParsedOutline, OutlineError> {
    let text = engine.generate(prompt.to_string()).map_err(|e| match e {
        ProviderError::EmptyCompletion => OutlineError::EmptyOutline,
        other => OutlineError::Provider(other),
    })?;
    parse_outline(&text, &engine.config.topic)
}

fn keep(engine: &Engine, parsed: ParsedOutline) -> Outline {
    for w in parsed.warnings {
        engine.warn(format!("outline: {w}"));
    }
    parsed.outline
}

/// Asks for an outline given only the topic. One retry; a second failure
/// aborts the run because nothing can be written without headings.
pub fn draft_outline(engine: &Engine) -> Result<Outline, OutlineError> {
    let prompt = prompts::WRITE_OUTLINE.render(&[engine.config.topic.as_str()]);
    match attempt(engine, &prompt) {
        Ok(p) => Ok(keep(engine, p)),
        Err(first) => {
            engine.warn(format!("draft outline attempt 1 failed: {first}"));
            attempt(engine, &prompt).map(|p| keep(engine, p))
        }
    }
}

/// Refines `draft` with the concept pool. An empty pool returns the draft
/// without calling the model; unusable output twice also returns the draft.
pub fn polish_outline(engine: &Engine, draft: &Outline, pool: &ConceptPool) -> Outline {
    if pool.is_empty() {
        return draft.clone();
    }
    let prompt = prompts::POLISH_OUTLINE.render(&[
        &render_outline(draft),
        &format_concepts(pool, engine.config.pool_word_budget),
    ]);
    for n in 1..=2 {
        match attempt(engine, &prompt) {
            Ok(p) => return keep(engine, p),
            Err(e) => engine.warn(format!("outline polish attempt {n} failed: {e}")),
        }
    }
    engine.warn("outline polish unusable; keeping the draft outline");
    draft.clone()
}
