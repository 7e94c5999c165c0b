use bbqp_core::BbqpError;

/// Failure of a CLI command together with its process exit code.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_IO: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_GENERATION: u8 = 4;

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<BbqpError> for CliError {
    fn from(e: BbqpError) -> Self {
        let code = match &e {
            BbqpError::Io { .. } => EXIT_IO,
            BbqpError::Generation(_) => EXIT_GENERATION,
            _ => EXIT_INVALID,
        };
        let message = match &e {
            BbqpError::Config(violations) => {
                let mut s = String::from("invalid configuration:");
                for v in violations {
                    s.push_str("\n  ");
                    s.push_str(&v.to_string());
                }
                s
            }
            _ => e.to_string(),
        };
        CliError { code, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
