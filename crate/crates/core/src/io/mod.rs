//! Run manifests, output files and the command implementations behind the
//! `resonant-pulse` binary.

mod commands;
mod files;
mod manifest;

pub use commands::{
    run_preset, run_propagate, run_sweep, run_synthesize, OutputOptions, PropagateReport, SweepRow,
    DIFFERENCE_FILE, PULSE_FILE, SUMMARY_FILE, SWEEP_FILE, SWEEP_HEADER, TRAJECTORY_FILE,
};
pub use files::{
    fmt_full, fmt_short, read_numeric_csv, read_summary, read_trajectory_csv, trajectory_rows,
    write_pulse_csv, write_trajectory_csv, NumericTable, Summary, TrajectoryRow, DIFFERENCE_HEADER,
    PULSE_HEADER, TRAJECTORY_HEADER,
};
pub use manifest::{FrameSelection, Preset, RawConfig, RunManifest};

use thiserror::Error;

use crate::domain::DomainError;
use crate::dynamics::DynamicsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("numerical failure{}: {message}", at.map(|t| format!(" at t = {t} au")).unwrap_or_default())]
    Numerical { message: String, at: Option<f64> },
}

impl CliError {
    /// Process exit status: 2 for configuration and output problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Numerical { message: m, .. } => m,
        }
    }

    pub(crate) fn invalid(e: DomainError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Numerical {
            at: e.failure_time(),
            message: e.to_string(),
        }
    }
}
