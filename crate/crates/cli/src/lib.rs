//! Command-line front end: scenario files, commands, verification suites and
//! deterministic result documents.

pub mod commands;
pub mod document;
pub mod scenario;
pub mod verify;

pub use commands::{run, Cli, Outcome};
