// SPDX-License-Identifier: Apache-2.0

//! Library half of the `semiflow` command: configuration, output formats
//! and subcommand drivers.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{CliError, Exit};
pub use config::{ConfigError, ExperimentConfig};
