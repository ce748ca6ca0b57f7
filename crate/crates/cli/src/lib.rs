//! Command-line front end for `owcoreset`: CSV ingestion, coreset builds,
//! evaluation and the square-root hardness instance. Every command writes
//! one flat JSON report.

pub mod commands;
pub mod io;
pub mod synth;

pub use commands::{run, Cli, Command};
