//! Experiment harness: reproduces the alarm-rate tables, calibrates the MRE
//! variance scale, and runs closed-loop scenarios from TOML files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod reference;
pub mod report;
pub mod trace;

use std::io;

pub use commands::{StatOptions, MIN_SAMPLES};
pub use report::{Format, Report, Row, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] cusign_core::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => exit::USAGE,
            CliError::Core(
                cusign_core::Error::Config(_)
                | cusign_core::Error::Domain(_)
                | cusign_core::Error::Dimension(_)
                | cusign_core::Error::UnsupportedThreshold(_),
            ) => exit::USAGE,
            _ => exit::CHECK_FAILED,
        }
    }
}
