//! Batch driver behind the `cavity-dit` binary.

pub mod config;
pub mod output;
mod run;

pub use config::{GridSpec, MethodSelection, RunConfig, SweepParameter, SweepSpec};
pub use run::{
    figure_configs, reproduce_figure, run_point, run_spectrum, run_sweep, FigureId, FigureOutcome, PointOutcome,
    SweepOutcome,
};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error at {point}: {source}")]
    Numerical { point: String, source: Error },
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration and output problems, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}
