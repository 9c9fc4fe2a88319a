//! One end-to-end run: acquire, outline, compose, polish, evaluate, and
//! persist every artifact plus a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use treewrite::acquisition::{self, AcquisitionState};
use treewrite::composition::{compose, polish_article};
use treewrite::outline::{draft_outline, polish_outline};
use treewrite::providers::cassette::CassetteMode;
use treewrite::providers::ProviderIds;
use treewrite::{render_outline, AcquisitionError, Engine, RunConfig};

use crate::evaluate::report_for;
use crate::settings::Settings;
use crate::wiring::Wired;
use crate::{exit, write_json, write_text, Failure};

pub const MANIFEST: &str = "manifest.json";
pub const TREE: &str = "tree.json";
pub const CONCEPTS: &str = "concepts.json";
pub const OUTLINE: &str = "outline.md";
pub const ARTICLE_DRAFT: &str = "article-draft.md";
pub const ARTICLE: &str = "article.md";
pub const REFERENCES: &str = "references.json";
pub const EVAL_REPORT: &str = "eval-report.json";
pub const CASSETTE: &str = "cassette.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub status: RunStatus,
    pub failure: Option<StageFailure>,
    pub config: RunConfig,
    pub providers: ProviderIds,
    pub cassette_mode: Option<CassetteMode>,
    /// Artifact name to file path relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(exit::OK, |f| f.exit_code)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

struct Recorder<'a> {
    dir: &'a Path,
    manifest: RunManifest,
    clock: Instant,
}

impl Recorder<'_> {
    fn json<T: Serialize>(&mut self, name: &str, file: &str, value: &T) -> Result<(), Failure> {
        write_json(&self.dir.join(file), value)?;
        self.manifest.artifacts.insert(name.to_string(), file.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, file: &str, text: &str) -> Result<(), Failure> {
        write_text(&self.dir.join(file), text)?;
        self.manifest.artifacts.insert(name.to_string(), file.to_string());
        Ok(())
    }

    fn lap(&mut self, stage: &str) {
        self.manifest
            .timings_ms
            .insert(stage.to_string(), self.clock.elapsed().as_millis() as u64);
        self.clock = Instant::now();
    }

    fn fail(&mut self, stage: &str, message: String, exit_code: i32) {
        self.manifest.status = RunStatus::Failed;
        self.manifest.failure = Some(StageFailure {
            stage: stage.to_string(),
            message,
            exit_code,
        });
    }
}

#[derive(Serialize)]
struct Snapshot<'a> {
    step: u32,
    tree: &'a treewrite::InformationTree,
    pool: &'a treewrite::ConceptPool,
}

/// Runs the pipeline into `<output_dir>/<run_id>`. Stage failures are
/// recorded in the manifest rather than returned; only I/O problems with
/// the run directory itself are errors.
pub fn run(settings: &Settings, wired: &Wired) -> Result<RunOutcome, Failure> {
    run_with_config(settings, settings.config.clone(), wired)
}

/// [`run`] with a config override, used by the depth sweep.
pub fn run_with_config(settings: &Settings, config: RunConfig, wired: &Wired) -> Result<RunOutcome, Failure> {
    let run_id = uuid::Uuid::new_v4().to_string();
    let dir = settings.output_dir.join(&run_id);
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::new(exit::IO, format!("cannot create run directory {}: {e}", dir.display())))?;
    let manifest = RunManifest {
        run_id,
        status: RunStatus::Ok,
        failure: None,
        config: config.clone(),
        providers: wired.providers.describe(),
        cassette_mode: settings.cassette.as_ref().map(|(_, m)| *m),
        artifacts: BTreeMap::new(),
        timings_ms: BTreeMap::new(),
        warnings: Vec::new(),
    };
    let mut rec = Recorder {
        dir: &dir,
        manifest,
        clock: Instant::now(),
    };

    let stages = match Engine::with_options(wired.providers.clone(), config, settings.options) {
        Ok(engine) => {
            let r = stages(settings, &engine, &mut rec);
            rec.manifest.warnings.extend(engine.take_warnings());
            r
        }
        Err(e) => {
            rec.fail("config", e.to_string(), exit::CONFIG);
            Ok(())
        }
    };
    if let Err(f) = stages {
        rec.fail("io", f.message, f.code);
    }
    finish_cassette(settings, wired, &mut rec)?;
    write_json(&dir.join(MANIFEST), &rec.manifest)?;
    let manifest = rec.manifest;
    Ok(RunOutcome { dir, manifest })
}

fn stages(settings: &Settings, engine: &Engine, rec: &mut Recorder) -> Result<(), Failure> {
    let mut snapshot_err = None;
    let mut snapshots = Vec::new();
    let dir = rec.dir.to_path_buf();
    let mut observe = |s: &AcquisitionState| {
        if !settings.snapshots {
            return;
        }
        let file = format!("snapshots/step-{}.json", s.step);
        let snap = Snapshot {
            step: s.step,
            tree: &s.tree,
            pool: &s.pool,
        };
        match std::fs::create_dir_all(dir.join("snapshots"))
            .map_err(|e| Failure::new(exit::IO, e.to_string()))
            .and_then(|_| write_json(&dir.join(&file), &snap))
        {
            Ok(()) => snapshots.push((format!("snapshot-{}", s.step), file)),
            Err(e) => snapshot_err = Some(e),
        }
    };
    let acquired = acquisition::acquire_with(engine, &mut observe);
    if let Some(e) = snapshot_err {
        return Err(e);
    }
    rec.manifest.artifacts.extend(snapshots);
    rec.lap("acquisition");
    let state = match acquired {
        Ok(s) => s,
        Err(e) => {
            let code = match e {
                AcquisitionError::Bootstrap(_) => exit::BOOTSTRAP,
                AcquisitionError::Config(_) => exit::CONFIG,
                _ => exit::STAGE_ABORT,
            };
            rec.fail("acquisition", e.to_string(), code);
            return Ok(());
        }
    };
    rec.json("tree", TREE, &state.tree)?;
    rec.json("concepts", CONCEPTS, &state.pool)?;

    let draft = match draft_outline(engine) {
        Ok(o) => o,
        Err(e) => {
            rec.lap("outline");
            rec.fail("outline", e.to_string(), exit::STAGE_ABORT);
            return Ok(());
        }
    };
    let outline = polish_outline(engine, &draft, &state.pool);
    rec.text("outline", OUTLINE, &format!("{}\n", render_outline(&outline)))?;
    rec.lap("outline");

    let draft_article = compose(engine, &outline, &state.tree);
    rec.text("article-draft", ARTICLE_DRAFT, &draft_article.render_markdown())?;
    rec.lap("composition");
    let article = polish_article(engine, &draft_article);
    for v in article.citation_violations() {
        engine.warn(format!("citation check: {v}"));
    }
    rec.text("article", ARTICLE, &article.render_markdown())?;
    rec.json("references", REFERENCES, &article.bibliography)?;
    rec.lap("polish");

    let sources: Vec<_> = article.bibliography.values().cloned().collect();
    match report_for(
        ARTICLE,
        &article.prose(),
        Some(&draft_article.prose()),
        &sources,
        engine,
    ) {
        Ok(report) => rec.json("eval-report", EVAL_REPORT, &report)?,
        Err(e) => engine.warn(format!("evaluation skipped: {e}")),
    }
    rec.lap("evaluation");
    Ok(())
}

/// Saves a recorded cassette to its configured path and copies the
/// cassette into the run directory.
fn finish_cassette(settings: &Settings, wired: &Wired, rec: &mut Recorder) -> Result<(), Failure> {
    let (Some((path, mode)), Some(cassette)) = (&settings.cassette, &wired.cassette) else {
        return Ok(());
    };
    if *mode == CassetteMode::Passthrough {
        return Ok(());
    }
    if *mode == CassetteMode::Record {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Failure::new(exit::IO, e.to_string()))?;
        }
        cassette
            .save(path)
            .map_err(|e| Failure::new(exit::IO, format!("cannot save cassette {}: {e}", path.display())))?;
    }
    rec.text("cassette", CASSETTE, &cassette.to_json())
}
