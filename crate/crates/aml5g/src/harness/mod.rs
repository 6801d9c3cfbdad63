//! Configuration parsing, seeded experiment orchestration, metric
//! aggregation, and table/report emission.

pub mod config;
pub mod defense_tables;
pub mod report;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Scenario};
pub use report::{emit_report, MetricsReport, Provenance, ReportFormat, SeedRow};
pub use run::run_experiment;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: field {field}: {message}")]
    Validation { field: String, message: String },
    #[error("seed {seed}: {source}")]
    SeedRun {
        seed: u64,
        #[source]
        source: crate::scenario1::ScenarioError,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
