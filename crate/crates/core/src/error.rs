use std::path::PathBuf;

use thiserror::Error;

use crate::ql::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed reified structure at {iri}: {message}")]
    Structure { iri: String, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("unknown dataset {0}")]
    UnknownDataset(String),

    #[error("unknown version {0}")]
    UnknownVersion(String),

    #[error("unknown resource {0}")]
    UnknownResource(String),

    #[error("{0}")]
    Archive(String),

    #[error("query error: {0}")]
    Query(String),

    #[error("invalid query: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidQuery(Vec<Diagnostic>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn structure(iri: impl ToString, message: impl Into<String>) -> Self {
        Error::Structure {
            iri: iri.to_string(),
            message: message.into(),
        }
    }

    /// Errors caused by user input rather than by a bug or broken archive.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Integrity(_))
    }
}
