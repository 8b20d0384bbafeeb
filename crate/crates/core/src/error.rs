use std::path::PathBuf;

/// Errors produced by the simulator and its configuration layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value failed validation. `path` is the dotted field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// A configuration or parameter file could not be parsed.
    #[error("failed to parse {}: {message}", file.display())]
    Parse { file: PathBuf, message: String },

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input (config, parse, domain).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Parse { .. } | Error::Domain(_))
    }
}

impl Error {
    /// Process exit status for command-line use: 2 for bad input, 3 for
    /// numeric failure, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 3,
            e if e.is_config_error() => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
