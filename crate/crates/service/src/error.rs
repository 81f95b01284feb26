use moodspring_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("session is not initialized; send a config frame first")]
    SessionNotFound,
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl ServiceError {
    /// Stable code carried in protocol error frames.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::SessionNotFound => "SessionNotFound",
            ServiceError::MalformedFrame(_) => "MalformedFrame",
            ServiceError::Config(_) | ServiceError::Core(CoreError::Config(_)) => "ConfigError",
            ServiceError::Io(_) => "IoError",
            ServiceError::Core(e) => match e {
                CoreError::InvalidInput(_) => "InvalidInput",
                CoreError::TooShort { .. } => "TooShort",
                CoreError::InsufficientData(_) => "InsufficientData",
                CoreError::InsufficientGroups(_) => "InsufficientGroups",
                CoreError::Numerical(_) => "NumericalError",
                CoreError::Format { .. } => "FormatError",
                CoreError::Config(_) => unreachable!(),
            },
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Io(e.to_string())
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
