//! Experiment configuration, drivers and reports behind the `wkam` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{LabError, Result};
pub use experiments::run;
pub use report::{ExperimentReport, Verdict};
