//! Batch runner for quantum source experiments.
//!
//! A TOML config names a source, an optional memoryless channel and the
//! tests to run. [`run_experiment`] evaluates them and returns a
//! [`RunReport`]; [`emit_report`] writes the JSON report and the decay CSV.

use std::path::PathBuf;

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, ExperimentConfig};
pub use report::{emit_report, write_timing, ReportFormat};
pub use run::{run_experiment, RunReport};

/// Environment variable overriding the dense dimension cap.
pub const MAX_DENSE_DIM_ENV: &str = "QSOURCE_MAX_DENSE_DIM";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] qsource_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(_) | RunError::Io { .. } => 3,
        }
    }
}
