use std::path::{Path, PathBuf};

use freqatt_core::Error as CoreError;

/// Process exit codes, one per failure category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Config = 2,
    Io = 3,
    Numeric = 4,
    Grid = 5,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: unknown model kind `{kind}`")]
    UnknownModelKind { path: PathBuf, kind: String },
    #[error("nothing to plot: {0}")]
    NothingToPlot(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, message: impl std::fmt::Display) -> Self {
        CliError::Format {
            path: path.as_ref().to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Io { .. }
            | CliError::Dataset(_)
            | CliError::Format { .. }
            | CliError::UnknownModelKind { .. } => ExitCode::Io,
            CliError::NothingToPlot(_) => ExitCode::Grid,
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_) | CoreError::SymmetryViolation { .. } | CoreError::NonFinite(_) => {
                    ExitCode::Numeric
                }
                CoreError::IncompleteGrid(_) => ExitCode::Grid,
                _ => ExitCode::Config,
            },
        }
    }
}

/// Problems with the contents of a dataset file.
#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}:{line}: expected {expected} values, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: field {field} is not a number: `{value}`")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        field: usize,
        value: String,
    },
    #[error("{path}:{line}: label `{label}` is not one of the known classes")]
    UnknownLabel { path: PathBuf, line: usize, label: String },
    #[error("{path}: bad shape header: {message}")]
    BadHeader { path: PathBuf, message: String },
    #[error("{path}: no samples")]
    Empty { path: PathBuf },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
