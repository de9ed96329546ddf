use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants map one-to-one onto the CLI exit codes, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("identity violated: {0}")]
    Identity(String),

    #[error("degree {requested} out of range (complex built to degree {available})")]
    DegreeOutOfRange { requested: usize, available: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// 0 ok, 1 usage, 2 parse/input, 3 resource cap, 4 identity or numerical violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidInput(_) | Error::Io(_) => 2,
            Error::Resource(_) => 3,
            Error::Structural(_) | Error::Numerical(_) | Error::Identity(_) => 4,
            Error::DegreeOutOfRange { .. } => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
