//! Argument parsing and subcommand dispatch.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use treewrite::Engine;

use crate::settings::{RunArgs, Settings};
use crate::{evaluate, exit, pipeline, sweep, wiring, Failure};

#[derive(Debug, Parser)]
#[command(
    name = "treewrite",
    version,
    about = "Write long-form articles from an expanding information tree"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline and write a run directory.
    Run(RunArgs),
    /// Score an article file and write `<stem>.eval.json` beside it.
    Evaluate {
        article: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run once per depth and write a CSV table of KD and diversity.
    DepthSweep {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        depths: Vec<u32>,
        /// Defaults to `<output-dir>/depth-sweep.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Runs a parsed command, printing the main output path on success.
pub fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Run(args) => {
            let settings = Settings::resolve(&args)?;
            let wired = wiring::build(&settings)?;
            let outcome = pipeline::run(&settings, &wired)?;
            let code = outcome.manifest.exit_code();
            if let Some(f) = &outcome.manifest.failure {
                log::error!("{} stage failed: {}", f.stage, f.message);
            }
            println!("{}", outcome.dir.join(pipeline::MANIFEST).display());
            Ok(code)
        }
        Command::Evaluate { article, mut run } => {
            // a topic is irrelevant to scoring but required for a config
            run.topic.get_or_insert_with(|| "evaluation".to_string());
            let settings = Settings::resolve(&run)?;
            let wired = wiring::build(&settings)?;
            let engine = Engine::with_options(wired.providers, settings.config, settings.options)
                .map_err(|e| Failure::config(e.to_string()))?;
            let (_, path) = evaluate::evaluate_file(&article, &engine)?;
            println!("{}", path.display());
            Ok(exit::OK)
        }
        Command::DepthSweep { depths, csv, run } => {
            if depths.is_empty() {
                return Err(Failure::config("--depths needs at least one value"));
            }
            let settings = Settings::resolve(&run)?;
            let wired = wiring::build(&settings)?;
            std::fs::create_dir_all(&settings.output_dir).map_err(|e| {
                Failure::new(
                    exit::IO,
                    format!("cannot create {}: {e}", settings.output_dir.display()),
                )
            })?;
            let rows = sweep::depth_sweep(&settings, &wired, &depths)?;
            let path = csv.unwrap_or_else(|| settings.output_dir.join("depth-sweep.csv"));
            sweep::write_csv(&path, &rows)?;
            println!("{}", path.display());
            Ok(exit::OK)
        }
    }
}
