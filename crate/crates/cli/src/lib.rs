//! Driver for the `curlflux` command: configuration, dispatch, result tables and the named
//! reproductions behind the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod reproduce;
pub mod spec;
pub mod table;

pub use commands::{run, Outcome};
pub use config::{CommandKind, Format, RunConfig};
pub use table::{Cell, ResultTable};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    /// A module declined to produce a value.
    #[error("{source_module} refused: {message}")]
    Refused { source_module: &'static str, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError::Config { path: if path.is_empty() { ".".into() } else { path.into() }, message: message.into() }
    }

    /// Process exit status: 2 for usage errors, 3 for refusals, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Refused { .. } => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let (kind, path, source) = match self {
            CliError::Config { path, .. } => ("config", Some(path.clone()), None),
            CliError::Refused { source_module, .. } => ("refused", None, Some(*source_module)),
            CliError::Io(_) => ("io", None, None),
        };
        ErrorRecord { error: kind, path, source, message: self.to_string() }
    }
}

/// Structured error written to stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<&'static str>,
    pub message: String,
}

macro_rules! refusal {
    ($($t:ty => $name:literal),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Refused { source_module: $name, message: e.to_string() }
            }
        })*
    };
}

refusal! {
    curlflux::fields::FieldError => "fields",
    curlflux::geometry::GeometryError => "geometry",
    curlflux::traces::TraceError => "traces",
    curlflux::selection::SelectionError => "selection",
    curlflux::stokes::StokesError => "stokes",
    curlflux::birkhoff_rott::BrError => "birkhoff_rott",
}
