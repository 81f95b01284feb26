use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("clip too short: {len} samples, need at least {needed}")]
    TooShort { len: usize, needed: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient groups: {0}")]
    InsufficientGroups(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("format error{}: {message}", location(.line, .column))]
    Format {
        line: Option<usize>,
        column: Option<String>,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),
}

fn location(line: &Option<usize>, column: &Option<String>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(c)) => format!(" in column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn format(message: impl Into<String>) -> Self {
        Error::Format {
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn format_at(line: usize, column: Option<&str>, message: impl Into<String>) -> Self {
        Error::Format {
            line: Some(line),
            column: column.map(str::to_owned),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
