use std::path::{Path, PathBuf};

use serde::Serialize;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: flags, configs, or files that do not match their schema.
    #[error("{0}")]
    Validation(String),
    /// A well-formed request that failed while running.
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Core(#[from] astute_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
        reading: bool,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: i32,
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn read(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source, reading: true }
    }

    pub fn write(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source, reading: false }
    }

    /// 2 for validation failures, 3 for runtime and numeric ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(_) => 2,
            CliError::Io { reading, .. } => {
                if *reading {
                    2
                } else {
                    3
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        let code = self.exit_code();
        let kind = if code == 2 { "validation" } else { "runtime" };
        let doc = ErrorDoc { error: ErrorBody { code, kind, message: self.to_string() } };
        serde_json::to_string(&doc).expect("error document serializes")
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("invalid JSON: {e}"))
    }
}
