use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("computation error: {0}")]
    Compute(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Compute(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn config(e: impl ToString) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn input(e: impl ToString) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn compute(e: impl ToString) -> Self {
        CliError::Compute(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
