use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, flags or input files. Exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical stage failed. Exit code 3.
    #[error("stage `{stage}` failed ({params}): {source}")]
    Numerical {
        stage: &'static str,
        params: String,
        #[source]
        source: vdw_spectra::Error,
    },

    /// Filesystem trouble. Exit code 1.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Attaches the stage name and offending parameters to a numerical error.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str, params: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> StageContext<T> for vdw_spectra::Result<T> {
    fn stage(self, stage: &'static str, params: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { stage, params: params(), source })
    }
}
