use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input {0} outside [0, 1]")]
    InputOutOfRange(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("echo state property violated: {0}")]
    EspViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("capacity undefined: {0}")]
    UndefinedCapacity(String),

    #[error("non-finite prediction at closed-loop step {step}")]
    NonFinitePrediction { step: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// Stable machine-readable class, used for CLI exit reporting.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Dimension(_) | Error::InvalidArgument(_) | Error::InputOutOfRange(_) => "argument",
            Error::InvalidState(_) | Error::Numerical(_) | Error::NonFinitePrediction { .. } => "numerical",
            Error::EspViolation(_) => "esp-violation",
            Error::UndefinedCapacity(_) => "undefined-capacity",
            Error::Config { .. } => "config",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Realization { source, .. } => source.class(),
        }
    }
}
