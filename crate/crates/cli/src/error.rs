use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error(transparent)]
    Library(#[from] qdamp::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Library(qdamp::Error::InvalidParameter { .. }) => 2,
            CliError::Library(qdamp::Error::Io(_)) => 3,
            CliError::Library(_) => 1,
        }
    }
}

pub fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
