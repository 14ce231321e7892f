use std::path::PathBuf;

use crate::config::Diagnostic;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Config(Vec<Diagnostic>),
    #[error("resource estimate exceeds cap: {0}")]
    Resource(String),
    #[error(transparent)]
    Core(#[from] qcompress::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qcompress::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Resource(_) => EXIT_RESOURCE,
            CliError::Core(e) => match e {
                E::Validation(_) | E::DimensionMismatch { .. } => EXIT_CONFIG,
                E::ResourceLimit { .. } => EXIT_RESOURCE,
                E::Numerical(_) | E::Divergence { .. } => EXIT_NUMERICAL,
                _ => EXIT_FAILURE,
            },
            CliError::Io { .. } | CliError::Manifest { .. } => EXIT_FAILURE,
        }
    }
}
