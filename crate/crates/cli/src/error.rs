use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. Stable across releases.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const IO: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const CLASSIFICATION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] checkmat::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use checkmat::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Core(err) => match err {
                E::Parse { .. } => exit::IO,
                E::Convergence { .. } => exit::NUMERIC,
                E::Classification { .. } | E::Underdetermined(_) => exit::CLASSIFICATION,
                E::Dimension(_)
                | E::Alphabet { .. }
                | E::Argument(_)
                | E::Geometry(_)
                | E::Unsupported(_) => exit::USAGE,
            },
        }
    }
}
