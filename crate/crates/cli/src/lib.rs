//! Command-line front end and text persistence for the experiment pipeline.
//!
//! Three subcommands cover the workflow: `generate` solves a reference
//! problem and writes it as a dataset, `train` fits a network against that
//! dataset and writes a checkpoint plus an epoch history, and `evaluate`
//! scores the checkpoint on the reference lattice and exports plot-ready
//! long-form grids. Every file is delimited text with a `#` header block,
//! floats are rendered with 17 significant digits so values round-trip
//! exactly, and every command is deterministic in its config and seed.

pub mod commands;
pub mod config;
pub mod dataset;

use std::fmt;

/// Process-level failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed config, or inconsistent settings (exit 2).
    Config(String),
    /// Missing or unreadable files (exit 3).
    Io(String),
    /// Training or solving produced non-finite numbers (exit 4).
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Divergence(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Divergence(m) => write!(f, "divergence: {m}"),
        }
    }
}

impl From<apnn_core::Error> for CliError {
    fn from(e: apnn_core::Error) -> Self {
        match e {
            apnn_core::Error::Diverged { .. } | apnn_core::Error::Numerical(_) => {
                CliError::Divergence(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Render a float with 17 significant digits, enough to reparse the exact
/// same 64-bit value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
