//! File formats, transcript export and the `zkmip` command line, on top of
//! `zkmip-core`.

pub mod cli;
pub mod commands;
pub mod export;
pub mod formats;

pub use cli::Cli;
pub use commands::{run, CliError, Report};
