use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or buffer violated an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration text could not be parsed or validated.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A failure inside one cell of the trial grid.
    #[error("trial {command} @ {distance_ft} ft (jammer {jammer}): {source}")]
    Trial {
        command: String,
        distance_ft: f64,
        jammer: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by user configuration rather than runtime failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::InvalidInput(_) => true,
            Error::Trial { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
