use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("{0}")]
    Validation(String),

    /// A text input could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the file system rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    /// Prefixes parse and validation messages with a file name.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
