use std::io;
use std::path::PathBuf;

use falsify_core::models::ModelError;
use falsify_core::search::SearchError;
use falsify_core::sexpr::{Position, SexpError};
use falsify_core::stl::StlError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input file could not be read.
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    /// An output could not be written.
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: Box<Error> },
    #[error(transparent)]
    Syntax(#[from] SexpError),
    #[error(transparent)]
    Formula(#[from] StlError),
    #[error("{0}: {1}")]
    Invalid(Position, String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Csv(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn read(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Read {
            path: path.into(),
            source,
        }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Read { .. } | Error::Io { .. } | Error::File { .. }) => e,
            e => Error::File {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 for unreadable or malformed input, 2 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::File { source, .. } => source.exit_code(),
            Error::Read { .. }
            | Error::Syntax(_)
            | Error::Formula(_)
            | Error::Invalid(..)
            | Error::Validation(_)
            | Error::Csv(_) => 1,
            Error::Io { .. } | Error::Model(_) | Error::Search(_) => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
