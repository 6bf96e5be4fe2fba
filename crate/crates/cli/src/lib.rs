//! Library side of the `jcir` command-line tool: configuration parsing,
//! command dispatch and CSV rendering.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod table;

pub use commands::run;
pub use config::{parse_config, Command, RunConfig};
pub use table::{extract_config, Cell, Table};

/// Errors surfaced by the CLI, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(jcir_core::Error),
}

impl CliError {
    pub fn invalid(section: &str, key: &str, msg: &str) -> Self {
        CliError::Config(format!("{section}.{key}: {msg}"))
    }

    pub fn config(section: &str, err: jcir_core::Error) -> Self {
        CliError::Config(format!("{section}: {err}"))
    }

    /// 1 for configuration, validation and I/O problems, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<jcir_core::Error> for CliError {
    fn from(err: jcir_core::Error) -> Self {
        if err.is_validation() {
            CliError::Config(err.to_string())
        } else {
            CliError::Numerical(err)
        }
    }
}
