use std::path::PathBuf;

use thiserror::Error;

/// Every failure the CLI can report, each mapped to a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Range(String),

    #[error("{}:{line}: {source}", path.display())]
    AtLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: advseg_core::Error,
    },

    #[error(transparent)]
    Core(#[from] advseg_core::Error),

    #[error("differential test found {mismatches} mismatches and {audit_failures} audit failures")]
    Mismatch { mismatches: u64, audit_failures: u64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Parse { .. } | CliError::Config { .. } => 2,
            CliError::Core(advseg_core::Error::InvalidWorkload(_)) => 1,
            CliError::Range(_) | CliError::AtLine { .. } | CliError::Core(_) => 3,
            CliError::Mismatch { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_table() {
        let path = PathBuf::from("x");
        assert_eq!(CliError::Usage("u".into()).exit_code(), 1);
        assert_eq!(
            CliError::Parse {
                path: path.clone(),
                line: 1,
                message: "m".into()
            }
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::Config {
                path,
                message: "m".into()
            }
            .exit_code(),
            2
        );
        assert_eq!(CliError::Range("r".into()).exit_code(), 3);
        assert_eq!(
            CliError::Core(advseg_core::Error::OracleTooLarge {
                leaves: 1 << 17,
                cap: 1 << 16
            })
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::Mismatch {
                mismatches: 1,
                audit_failures: 0
            }
            .exit_code(),
            4
        );
    }
}
