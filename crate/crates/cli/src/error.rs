use std::fmt;

use qba_core::ModelError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(ModelError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => match e {
                ModelError::InvalidParameter { .. }
                | ModelError::EmptyGrid
                | ModelError::NonIncreasingGrid { .. }
                | ModelError::BandOutsideGrid { .. } => 2,
                ModelError::Unstable { .. } | ModelError::Singular { .. } | ModelError::Unsupported(_) => 3,
                ModelError::CalibrationDomain(_) | ModelError::NoBracket(_) => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
