//! Configuration, input loading and drivers for the full cascade.

mod config;
mod run;
mod source;

pub use config::{ConfigError, ImtPolicyKind, IttsConfig, ImtConfig, PipelineConfig, RunMode, SourceConfig};
pub use run::{build_stage, latency_report, run_sim, serve_stage, write_logs, RunError};
pub use source::{check_source, load_input, source_from_tokens, InputError};
