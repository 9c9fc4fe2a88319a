use std::sync::Mutex;

use crate::error::{InvalidValue, ProviderError};
use crate::model::RunConfig;
use crate::providers::{GenerationRequest, Providers};

/// How the acquisition loop decides it has gathered enough.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SufficiencyMode {
    /// Stop when no leaf needs expansion or the pool stopped growing.
    #[default]
    Rule,
    /// Ask the model; fall back to the rule when it fails.
    Judge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    pub sufficiency: SufficiencyMode,
    /// Use the model for fact decomposition and dedup when evaluating.
    pub judge_facts: bool,
}

/// Providers, run parameters and a bounded worker pool shared by all stages.
/// Non-fatal problems are collected as warnings for the run manifest.
pub struct Engine {
    pub providers: Providers,
    pub config: RunConfig,
    pub options: EngineOptions,
    workers: rayon::ThreadPool,
    warnings: Mutex<Vec<String>>,
}

impl Engine {
    pub fn new(providers: Providers, config: RunConfig) -> Result<Self, InvalidValue> {
        Self::with_options(providers, config, EngineOptions::default())
    }

    pub fn with_options(providers: Providers, config: RunConfig, options: EngineOptions) -> Result<Self, InvalidValue> {
        config.validate()?;
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("treewrite-worker-{i}"))
            .build()
            .map_err(|e| InvalidValue::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            providers,
            config,
            options,
            workers,
            warnings: Mutex::new(Vec::new()),
        })
    }

    /// Generation with the run's sampling parameters.
    pub fn generate(&self, prompt: String) -> Result<String, ProviderError> {
        self.providers.generate(&GenerationRequest::new(
            prompt,
            self.config.gen_temperature,
            self.config.gen_nucleus,
        ))
    }

    /// Maps `f` over `items` on the worker pool. Output order follows input
    /// order regardless of scheduling.
    pub fn par_map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        use rayon::prelude::*;
        self.workers.install(|| items.par_iter().map(&f).collect())
    }

    pub fn warn(&self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.lock().unwrap().push(message);
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().unwrap().clone()
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().unwrap())
    }
}
