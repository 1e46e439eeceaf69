use std::fmt;
use std::io;

/// Errors produced by the library.
#[derive(Debug)]
pub enum Error {
    /// A tensor or input does not have the expected shape.
    Shape {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    /// An architecture is internally inconsistent.
    Architecture(String),
    /// A value is outside its permitted domain (NaN weights, bad bit position, ...).
    InvalidArgument(String),
    /// A dataset with zero samples was supplied where samples are required.
    EmptyDataset,
    /// Training diverged (loss became non-finite).
    Diverged {
        epoch: usize,
    },
    /// A file could not be parsed. `location` names the offending line or byte offset.
    Parse {
        location: String,
        message: String,
    },
    Io(io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { expected, found } => {
                write!(f, "shape mismatch: expected {expected:?}, found {found:?}")
            }
            Error::Architecture(msg) => write!(f, "invalid architecture: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::Diverged { epoch } => write!(f, "training diverged (non-finite loss) in epoch {epoch}"),
            Error::Parse { location, message } => write!(f, "parse error at {location}: {message}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
