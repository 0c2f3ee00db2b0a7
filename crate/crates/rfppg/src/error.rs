use std::path::{Path, PathBuf};

/// Failures of the file formats and commands.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("{}:{line}: {msg}", path.display())]
    Config { path: PathBuf, line: usize, msg: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: rfppg_core::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] rfppg_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Format { path: path.to_path_buf(), msg: msg.into() }
    }

    pub fn core(context: impl Into<String>, source: rfppg_core::Error) -> Self {
        CliError::Core { context: context.into(), source }
    }

    /// The pipeline error underneath, if any.
    pub fn core_error(&self) -> Option<&rfppg_core::Error> {
        match self {
            CliError::Core { source, .. } | CliError::Pipeline(source) => Some(source),
            _ => None,
        }
    }

    /// Process exit status: 3 for a diverged training run, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.core_error() {
            Some(rfppg_core::Error::DivergedLoss { .. }) => 3,
            _ => 1,
        }
    }
}

pub(crate) fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
