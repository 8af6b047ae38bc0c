//! Command-line orchestration for the `symvar` binary: run manifests,
//! per-task writers and the exit-code contract.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod tasks;

pub use error::{CliError, CliResult};
pub use manifest::{run, RunManifest, RunOptions, Summary, Task};
