use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file. `location` names the line/column or field.
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid filtration: {0}")]
    Structural(String),

    #[error("index undefined: {0}")]
    Undefined(String),

    #[error("missing input: {0}")]
    Missing(String),

    /// Failure while processing one city-race pair.
    #[error("city '{city}', race '{race}': {source}")]
    Stage {
        city: String,
        race: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than internal faults.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Parameter(_)
            | Error::Undefined(_)
            | Error::Missing(_) => true,
            Error::Stage { source, .. } => source.is_user_error(),
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::Contract(_) | Error::Structural(_) => false,
        }
    }

    /// Process exit code: 1 for validation problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_user_error() {
            1
        } else {
            2
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
