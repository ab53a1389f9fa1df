use rieszlab::model_catalog::CatalogError;
use rieszlab::operator_lab::LabError;
use rieszlab::projection_norms::NormError;
use rieszlab::riesz_core::RieszError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Riesz(#[from] RieszError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("output directory {dir} is locked by another run (remove {lock} if stale)")]
    Locked { dir: String, lock: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Catalog(_) => "model_catalog",
            CliError::Riesz(_) => "riesz_core",
            CliError::Lab(_) => "operator_lab",
            CliError::Norm(_) => "projection_norms",
            CliError::Locked { .. } => "locked",
            CliError::Io { .. } => "io",
            CliError::Other(_) => "computation",
        }
    }

    pub fn record(&self, subcommand: &str) -> ErrorRecord {
        ErrorRecord {
            status: "error",
            subcommand: subcommand.to_string(),
            exit_code: self.exit_code(),
            kind: self.kind(),
            path: match self {
                CliError::Config { path, .. } => Some(path.clone()),
                _ => None,
            },
            message: self.to_string(),
        }
    }
}

/// Machine-readable failure written as `error.json` and to stderr.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub subcommand: String,
    pub exit_code: i32,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}
