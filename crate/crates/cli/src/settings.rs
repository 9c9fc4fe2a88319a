//! Run settings resolved from flags, environment, a TOML file and defaults,
//! in that order of precedence.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use treewrite::providers::cassette::CassetteMode;
use treewrite::{EngineOptions, RunConfig, SufficiencyMode, Topic};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Offline synthetic providers over a generated search universe.
    #[default]
    Mock,
    /// OpenAI-compatible chat and embeddings, Bing-style web search.
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SufficiencyArg {
    Rule,
    Judge,
}

/// Options shared by `run` and `depth-sweep`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Subject of the article.
    #[arg(long, env = "TREEWRITE_TOPIC")]
    pub topic: Option<String>,
    /// TOML file with defaults for any of these options.
    #[arg(long, env = "TREEWRITE_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "TREEWRITE_MAX_DEPTH")]
    pub max_depth: Option<u32>,
    #[arg(long, env = "TREEWRITE_RESULTS_PER_QUERY")]
    pub results_per_query: Option<usize>,
    /// Documents retrieved per outline section.
    #[arg(long = "section-k", env = "TREEWRITE_SECTION_K")]
    pub section_k: Option<usize>,
    #[arg(long, env = "TREEWRITE_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "TREEWRITE_TEMPERATURE")]
    pub temperature: Option<f64>,
    #[arg(long, env = "TREEWRITE_NUCLEUS")]
    pub nucleus: Option<f64>,
    #[arg(long, env = "TREEWRITE_MAX_CHILDREN")]
    pub max_children: Option<usize>,
    #[arg(long, env = "TREEWRITE_POOL_WORD_BUDGET")]
    pub pool_word_budget: Option<usize>,
    #[arg(long, env = "TREEWRITE_WORKERS")]
    pub workers: Option<usize>,
    /// Parent directory for run directories.
    #[arg(long, short = 'o', env = "TREEWRITE_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,

    #[arg(long, value_enum, env = "TREEWRITE_PROVIDER")]
    pub provider: Option<ProviderKind>,
    #[arg(long, env = "TREEWRITE_LLM_BASE_URL")]
    pub llm_base_url: Option<String>,
    #[arg(long, env = "TREEWRITE_LLM_API_KEY", hide_env_values = true)]
    pub llm_api_key: Option<String>,
    #[arg(long, env = "TREEWRITE_LLM_MODEL")]
    pub llm_model: Option<String>,
    #[arg(long, env = "TREEWRITE_SEARCH_BASE_URL")]
    pub search_base_url: Option<String>,
    #[arg(long, env = "TREEWRITE_SEARCH_API_KEY", hide_env_values = true)]
    pub search_api_key: Option<String>,
    #[arg(long, env = "TREEWRITE_EMBED_BASE_URL")]
    pub embed_base_url: Option<String>,
    #[arg(long, env = "TREEWRITE_EMBED_API_KEY", hide_env_values = true)]
    pub embed_api_key: Option<String>,
    #[arg(long, env = "TREEWRITE_EMBED_MODEL")]
    pub embed_model: Option<String>,

    /// Cassette file for recording or replaying provider calls.
    #[arg(long, env = "TREEWRITE_CASSETTE")]
    pub cassette: Option<PathBuf>,
    /// record, replay or passthrough.
    #[arg(long, env = "TREEWRITE_CASSETTE_MODE")]
    pub cassette_mode: Option<CassetteMode>,

    #[arg(long, value_enum, env = "TREEWRITE_SUFFICIENCY")]
    pub sufficiency: Option<SufficiencyArg>,
    /// Use the language model for fact decomposition and dedup.
    #[arg(long, env = "TREEWRITE_JUDGE_FACTS")]
    pub judge_facts: bool,
    /// Write the tree and pool after every acquisition step.
    #[arg(long, env = "TREEWRITE_SNAPSHOTS")]
    pub snapshots: bool,

    /// Categories per expansion and facets per node in the mock universe.
    #[arg(long, env = "TREEWRITE_MOCK_BRANCHING")]
    pub mock_branching: Option<usize>,
    /// Facet levels in the mock universe.
    #[arg(long, env = "TREEWRITE_MOCK_LEVELS")]
    pub mock_levels: Option<usize>,
    #[arg(long, env = "TREEWRITE_MOCK_DOCS_PER_NODE")]
    pub mock_docs_per_node: Option<usize>,
}

/// The TOML file form of [`RunArgs`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub topic: Option<String>,
    pub max_depth: Option<u32>,
    pub results_per_query: Option<usize>,
    pub section_k: Option<usize>,
    pub seed: Option<u64>,
    pub temperature: Option<f64>,
    pub nucleus: Option<f64>,
    pub max_children: Option<usize>,
    pub pool_word_budget: Option<usize>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub llm_base_url: Option<String>,
    pub llm_api_key: Option<String>,
    pub llm_model: Option<String>,
    pub search_base_url: Option<String>,
    pub search_api_key: Option<String>,
    pub embed_base_url: Option<String>,
    pub embed_api_key: Option<String>,
    pub embed_model: Option<String>,
    pub cassette: Option<PathBuf>,
    pub cassette_mode: Option<String>,
    pub sufficiency: Option<SufficiencyArg>,
    pub judge_facts: Option<bool>,
    pub snapshots: Option<bool>,
    pub mock_branching: Option<usize>,
    pub mock_levels: Option<usize>,
    pub mock_docs_per_node: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::config(format!("invalid config file {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointSettings {
    pub base_url: Option<String>,
    pub api_key: Option<String>,
    pub model: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockSettings {
    pub branching: usize,
    pub levels: usize,
    pub docs_per_node: usize,
}

impl Default for MockSettings {
    fn default() -> Self {
        Self {
            branching: 2,
            levels: 3,
            docs_per_node: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub options: EngineOptions,
    pub output_dir: PathBuf,
    pub provider: ProviderKind,
    pub llm: EndpointSettings,
    pub search: EndpointSettings,
    pub embed: EndpointSettings,
    pub cassette: Option<(PathBuf, CassetteMode)>,
    pub snapshots: bool,
    pub mock: MockSettings,
}

pub const DEFAULT_OUTPUT_DIR: &str = "runs";

impl Settings {
    /// Defaults for `topic` with mock providers.
    pub fn mock(topic: Topic) -> Self {
        Self {
            config: RunConfig::new(topic),
            options: EngineOptions::default(),
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            provider: ProviderKind::Mock,
            llm: EndpointSettings {
                base_url: None,
                api_key: None,
                model: None,
            },
            search: EndpointSettings {
                base_url: None,
                api_key: None,
                model: None,
            },
            embed: EndpointSettings {
                base_url: None,
                api_key: None,
                model: None,
            },
            cassette: None,
            snapshots: false,
            mock: MockSettings::default(),
        }
    }

    pub fn resolve(args: &RunArgs) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
            flag.or(file)
        }
        let topic_text = pick(args.topic.clone(), file.topic.clone())
            .ok_or_else(|| Failure::config("a topic is required (--topic, TREEWRITE_TOPIC or config file)"))?;
        let topic = Topic::new(topic_text).map_err(|e| Failure::config(e.to_string()))?;

        let mut cfg = RunConfig::new(topic);
        cfg.max_depth = pick(args.max_depth, file.max_depth).unwrap_or(cfg.max_depth);
        cfg.results_per_query = pick(args.results_per_query, file.results_per_query).unwrap_or(cfg.results_per_query);
        cfg.section_retrieve_count = pick(args.section_k, file.section_k).unwrap_or(cfg.section_retrieve_count);
        cfg.seed = pick(args.seed, file.seed).unwrap_or(cfg.seed);
        cfg.gen_temperature = pick(args.temperature, file.temperature).unwrap_or(cfg.gen_temperature);
        cfg.gen_nucleus = pick(args.nucleus, file.nucleus).unwrap_or(cfg.gen_nucleus);
        cfg.max_children_per_node = pick(args.max_children, file.max_children).unwrap_or(cfg.max_children_per_node);
        cfg.pool_word_budget = pick(args.pool_word_budget, file.pool_word_budget).unwrap_or(cfg.pool_word_budget);
        cfg.workers = pick(args.workers, file.workers).unwrap_or(cfg.workers);
        cfg.validate().map_err(|e| Failure::config(e.to_string()))?;

        let file_mode = file
            .cassette_mode
            .as_deref()
            .map(str::parse::<CassetteMode>)
            .transpose()
            .map_err(Failure::config)?;
        let cassette_path = pick(args.cassette.clone(), file.cassette.clone());
        let cassette_mode = pick(args.cassette_mode, file_mode);
        let cassette = match (cassette_path, cassette_mode) {
            (Some(p), mode) => Some((p, mode.unwrap_or(CassetteMode::Replay))),
            (None, Some(CassetteMode::Passthrough) | None) => None,
            (None, Some(mode)) => return Err(Failure::config(format!("cassette mode {mode} needs --cassette"))),
        };

        let sufficiency = match pick(args.sufficiency, file.sufficiency) {
            Some(SufficiencyArg::Judge) => SufficiencyMode::Judge,
            _ => SufficiencyMode::Rule,
        };
        let defaults = MockSettings::default();
        let mock = MockSettings {
            branching: pick(args.mock_branching, file.mock_branching).unwrap_or(defaults.branching),
            levels: pick(args.mock_levels, file.mock_levels).unwrap_or(defaults.levels),
            docs_per_node: pick(args.mock_docs_per_node, file.mock_docs_per_node).unwrap_or(defaults.docs_per_node),
        };
        if mock.branching == 0 || mock.docs_per_node == 0 {
            return Err(Failure::config("mock branching and docs per node must be at least 1"));
        }

        Ok(Self {
            config: cfg,
            options: EngineOptions {
                sufficiency,
                judge_facts: args.judge_facts || file.judge_facts.unwrap_or(false),
            },
            output_dir: pick(args.output_dir.clone(), file.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            provider: pick(args.provider, file.provider).unwrap_or_default(),
            llm: EndpointSettings {
                base_url: pick(args.llm_base_url.clone(), file.llm_base_url.clone()),
                api_key: pick(args.llm_api_key.clone(), file.llm_api_key.clone()),
                model: pick(args.llm_model.clone(), file.llm_model.clone()),
            },
            search: EndpointSettings {
                base_url: pick(args.search_base_url.clone(), file.search_base_url.clone()),
                api_key: pick(args.search_api_key.clone(), file.search_api_key.clone()),
                model: None,
            },
            embed: EndpointSettings {
                base_url: pick(args.embed_base_url.clone(), file.embed_base_url.clone()),
                api_key: pick(args.embed_api_key.clone(), file.embed_api_key.clone()),
                model: pick(args.embed_model.clone(), file.embed_model.clone()),
            },
            cassette,
            snapshots: args.snapshots || file.snapshots.unwrap_or(false),
            mock,
        })
    }
}
