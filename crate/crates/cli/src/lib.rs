//! Pipeline plumbing around `multifuse-core`: input readers, on-disk
//! formats, run configuration and the command implementations behind the
//! `multifuse` binary.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod io;
pub mod report;
pub mod staging;

pub use commands::{run, Command};
pub use config::RunConfig;
