//! Command-line front end: configuration, loop files, the verify suite and
//! the experiment commands.

pub mod checks;
pub mod commands;
pub mod config;
pub mod loopfile;
pub mod output;

/// Unit statement carried by every output.
pub const UNITS: &str = "hbar = nu = 1";
