//! Library side of the `lpdens` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod output;
pub mod simulate;

pub use error::CliError;
