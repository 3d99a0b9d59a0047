use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed markup or record syntax.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input is syntactically fine but breaks a data invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Structural problem with a tabular or container format (missing header, ...).
    #[error("format error: {0}")]
    Format(String),

    /// JSON document does not match the expected schema.
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    /// An error raised while reading the named input file.
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by bad input data rather than the environment.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. } => false,
            Error::InFile { source, .. } => source.is_input_error(),
            _ => true,
        }
    }

    pub(crate) fn in_file(self, path: &std::path::Path) -> Self {
        Error::InFile {
            path: path.display().to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
