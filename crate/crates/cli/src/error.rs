//! Stage-labeled failures with the process exit code they map to.

use std::fmt::Debug;

use serde_json::json;
use sparsenilm_core::{ClassifierError, DatasetError, MetricsError, SolverError};

use crate::config::ConfigError;
use crate::ingest::IngestError;
use crate::model::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Numeric = 3,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    /// Pipeline stage that failed, e.g. `ingest` or `predict`.
    pub stage: &'static str,
    /// Error variant name, e.g. `MissingColumn`.
    pub kind: String,
    pub message: String,
    pub exit: ExitKind,
}

/// `Foo` from the Debug rendering `Foo(..)` / `Foo { .. }` / `Foo`.
fn variant<E: Debug>(e: &E) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

impl CliError {
    pub fn new(stage: &'static str, kind: impl Into<String>, message: impl Into<String>, exit: ExitKind) -> Self {
        CliError { stage, kind: kind.into(), message: message.into(), exit }
    }

    pub fn exit_code(&self) -> i32 {
        self.exit as i32
    }

    /// One-line machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "stage": self.stage,
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }

    pub fn config(e: ConfigError) -> Self {
        CliError::new("config", variant(&e), e.to_string(), ExitKind::Usage)
    }

    pub fn io(stage: &'static str, e: std::io::Error) -> Self {
        CliError::new(stage, "Io", e.to_string(), ExitKind::Data)
    }

    pub fn dataset(stage: &'static str, e: DatasetError) -> Self {
        let exit = match e {
            DatasetError::InvalidConfig(_) | DatasetError::InvalidFraction(_) | DatasetError::InvalidWindow { .. } => {
                ExitKind::Usage
            }
            _ => ExitKind::Data,
        };
        CliError::new(stage, variant(&e), e.to_string(), exit)
    }

    pub fn ingest(e: IngestError) -> Self {
        match e {
            IngestError::Dataset(d) => CliError::dataset("ingest", d),
            e => CliError::new("ingest", variant(&e), e.to_string(), ExitKind::Data),
        }
    }

    pub fn model(e: ModelError) -> Self {
        CliError::new("model", variant(&e), e.to_string(), ExitKind::Data)
    }

    pub fn classifier(stage: &'static str, e: ClassifierError) -> Self {
        let message = e.to_string();
        match e.root() {
            ClassifierError::Solver(s) => {
                let exit = match s {
                    SolverError::DimensionMismatch { .. } | SolverError::EmptyMatrix | SolverError::ZeroColumn(_) => {
                        ExitKind::Data
                    }
                    SolverError::InvalidConfig(_) | SolverError::OracleTooLarge { .. } => ExitKind::Usage,
                    SolverError::NotNormalized(_) | SolverError::NonFinite => ExitKind::Numeric,
                };
                CliError::new(stage, variant(s), message, exit)
            }
            ClassifierError::InvalidConfig(_) => CliError::new(stage, "InvalidConfig", message, ExitKind::Usage),
            root => CliError::new(stage, variant(root), message, ExitKind::Data),
        }
    }

    pub fn metrics(e: MetricsError) -> Self {
        CliError::new("eval", variant(&e), e.to_string(), ExitKind::Data)
    }
}
