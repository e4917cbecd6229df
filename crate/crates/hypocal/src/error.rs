use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_REJECTED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error in {}:{line}: {reason}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("rejected: {0}")]
    Rejected(String),
}

impl CliError {
    pub fn parse(file: &Path, line: usize, reason: impl fmt::Display) -> Self {
        Self::Parse {
            file: file.to_path_buf(),
            line,
            reason: reason.to_string(),
        }
    }

    pub fn validation(reason: impl fmt::Display) -> Self {
        Self::Validation(reason.to_string())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Parse { .. } | Self::Validation(_) | Self::Io { .. } => EXIT_DATA,
            Self::Rejected(_) => EXIT_REJECTED,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Parse { .. } => "parse",
            Self::Validation(_) => "validation",
            Self::Io { .. } => "io",
            Self::Rejected(_) => "rejected",
        }
    }

    /// Single-line `key=value` rendering for stderr.
    pub fn machine_line(&self) -> String {
        let quote = |s: &str| format!("{:?}", s.replace('\n', " "));
        match self {
            Self::Parse { file, line, reason } => format!(
                "error kind=parse file={} line={line} reason={}",
                quote(&file.display().to_string()),
                quote(reason)
            ),
            Self::Io { path, source } => format!(
                "error kind=io file={} reason={}",
                quote(&path.display().to_string()),
                quote(&source.to_string())
            ),
            Self::Usage(m) | Self::Validation(m) | Self::Rejected(m) => {
                format!("error kind={} reason={}", self.kind(), quote(m))
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
