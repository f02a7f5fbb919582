//! Readers and writers for the three exchange formats: free-MPS instances,
//! `name value` solution files and `name = value` settings files.
//!
//! Every writer is deterministic and every reader accepts what the writers
//! produce, so round snapshots can be fed straight back in as inputs.

use std::path::{Path, PathBuf};

use thiserror::Error;

mod exact;
mod mps;
mod settings;
mod solution;

pub use mps::{format_number, parse_instance, read_instance, write_instance, write_instance_string};
pub use settings::{parse_settings, read_settings, settings_to_string, write_settings};
pub use solution::{parse_solution, read_solution, solution_to_string, write_solution, SolutionRead};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot write name `{0}`: names must be non-empty and free of whitespace")]
    InvalidName(String),
}

impl IoError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        IoError::Syntax {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_string(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn check_name(name: &str) -> Result<(), IoError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        Err(IoError::InvalidName(name.to_string()))
    } else {
        Ok(())
    }
}

/// Parses a numeric token, accepting the usual spellings of infinity.
pub(crate) fn parse_number(token: &str) -> Option<f64> {
    match token.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => token.parse::<f64>().ok().filter(|v| !v.is_nan()),
    }
}
