//! Command-line front end for the achievability toolkit.
//!
//! The binary is a thin wrapper around [`run`], which the tests drive
//! in-process as well.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;

pub use cli::{Args, Command};
pub use commands::run;
pub use config::RunConfig;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Achievable = 0,
    Unachievable = 1,
    Inconclusive = 2,
    ConfigError = 3,
    IoError = 4,
}

impl Exit {
    pub const SUCCESS: Exit = Exit::Achievable;

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) => Exit::ConfigError,
            CliError::Io(_) => Exit::IoError,
        }
    }
}
