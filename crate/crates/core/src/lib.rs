//! Outline-guided article writing over an information tree that grows by
//! expansion and reflection, plus knowledge-density and source-diversity
//! metrics.

pub mod acquisition;
pub mod composition;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod outline;
pub mod prompts;
pub mod providers;

pub use engine::{Engine, EngineOptions, SufficiencyMode};
pub use error::{AcquisitionError, EvaluationError, InvalidValue, OutlineError, ProviderError};
pub use model::*;
pub use providers::Providers;

pub use chrono;
