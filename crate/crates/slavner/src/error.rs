//! Error type for the IO and orchestration layer; core errors gain the
//! file path they occurred in.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A core-library error tied to the file that triggered it.
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: slavner_core::Error,
    },

    #[error(transparent)]
    Core(#[from] slavner_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

/// Wraps an IO error with the path it concerns.
pub fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

/// Wraps a core error with the path it concerns.
pub fn core_at(path: impl Into<PathBuf>) -> impl FnOnce(slavner_core::Error) -> Error {
    let path = path.into();
    move |source| Error::InFile { path, source }
}
