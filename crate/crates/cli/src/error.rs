use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    AssertFailed(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::AssertFailed(_) => 4,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<crcm::Error> for CliError {
    fn from(e: crcm::Error) -> Self {
        match e {
            crcm::Error::WindowTooLarge(_) => CliError::Guard(e.to_string()),
            crcm::Error::Io(_) => CliError::Io(e.to_string()),
            crcm::Error::InvalidInput(_) | crcm::Error::DimensionMismatch { .. } | crcm::Error::Unbracketed => CliError::Config(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
