use std::path::{Path, PathBuf};

use walkdet_core::Error as CoreError;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}{source}", context_prefix(.path))]
    Core {
        path: Option<PathBuf>,
        #[source]
        source: CoreError,
    },
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

fn context_prefix(path: &Option<PathBuf>) -> String {
    path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}

impl CliError {
    pub fn core_at(path: &Path) -> impl FnOnce(CoreError) -> CliError + '_ {
        move |source| CliError::Core {
            path: Some(path.to_path_buf()),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core { source, .. } => source.category(),
            CliError::Config(_) => "Config",
            CliError::Input { .. } => "Input",
            CliError::Write { .. } => "Io",
            CliError::Internal(_) => "Internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_config() => EXIT_CONFIG,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Internal(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(source: CoreError) -> Self {
        CliError::Core { path: None, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
