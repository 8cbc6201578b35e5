//! Batch front end for `welfare-moments`.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod simulate;

pub use bundle::{LabeledInterval, Metadata, ReportBundle};
pub use commands::{run, write_output, Command, RunOutput};
pub use config::{config_hash, Flags, RunConfig};
pub use error::{CliError, CliResult, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION};
