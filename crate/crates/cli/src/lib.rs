//! Command-line front end for the dilatrix workbench: JSON matrix files in,
//! residual reports and artifacts out.

pub mod commands;
pub mod files;
pub mod report;

use thiserror::Error;

/// Problems with the invocation or its input files. Mathematical failures
/// are not errors; they produce a failing report.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Exit status for usage and parse errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for a completed run whose report does not pass.
pub const EXIT_FAIL: i32 = 1;
