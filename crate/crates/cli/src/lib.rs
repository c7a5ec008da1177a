//! File formats, configuration and the experiment pipeline around
//! `sparsenilm-core`.

pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod format;
pub mod ingest;
pub mod model;
pub mod report;

pub use commands::{cmd_eval, cmd_fit, cmd_predict, cmd_run, cmd_synth};
pub use config::{ConfigError, ExperimentConfig, Source};
pub use error::{CliError, ExitKind};
pub use ingest::{ingest_csv, write_household_csv, CsvSchema, IngestError};
pub use model::{Model, ModelError};
pub use report::Report;
