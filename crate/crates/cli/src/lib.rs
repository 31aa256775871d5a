//! Config-driven command implementations behind the `apigen` binary.

pub mod commands;
pub mod config;
pub mod runtime;

pub use config::PipelineConfig;
