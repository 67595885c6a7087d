use std::io;
use std::path::PathBuf;

use wpscript_core::{FormulaParseError, ParseError, SymError};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    InputError = 2,
    Unsupported = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("script parse error in {origin}: {source}")]
    Script { origin: String, source: ParseError },
    #[error("formula parse error in {origin}, line {}: {}", .source.line, .source.message)]
    Formula {
        origin: String,
        source: FormulaParseError,
    },
    #[error("invalid stack {0:?}: expected comma-separated decimals")]
    Stack(String),
    #[error("certificate {path}: {message}")]
    Certificate { path: PathBuf, message: String },
    #[error("corpus {path}: {message}")]
    Corpus { path: PathBuf, message: String },
    #[error(transparent)]
    Unsupported(#[from] SymError),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Unsupported(_) => Status::Unsupported,
            _ => Status::InputError,
        }
    }
}
