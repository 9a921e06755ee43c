use std::fmt;
use std::path::PathBuf;

/// Failures of a CLI run, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid or missing configuration. Exit code 2.
    Config(String),
    /// A pipeline stage failed. `stage` names the module and operation. Exit code 3.
    Numeric { stage: &'static str, source: spread_core::Error },
    /// Reading inputs or writing outputs failed. Exit code 1.
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric { stage, source } => write!(f, "numerical error in {stage}: {source}"),
            CliError::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

/// Tags a core error with the stage it came from.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> Stage<T> for spread_core::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| match source {
            // parameter checks inside the core are configuration problems
            spread_core::Error::Domain(msg) => CliError::Config(format!("{stage}: {msg}")),
            source => CliError::Numeric { stage, source },
        })
    }
}
