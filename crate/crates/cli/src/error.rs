use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {message}")]
    File { path: String, message: String },

    #[error("{path}:{line}: {message}")]
    Row {
        path: String,
        line: u64,
        message: String,
    },

    /// A numerical check failed; carries the human-readable report.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            _ => 2,
        }
    }
}

impl From<rdwo::Error> for CliError {
    fn from(e: rdwo::Error) -> Self {
        Self::Config(e.to_string())
    }
}
