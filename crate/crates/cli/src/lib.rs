//! Reproducible, file-emitting experiments on top of `dpp-rigidity`.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run, Outcome};
pub use output::Sink;
