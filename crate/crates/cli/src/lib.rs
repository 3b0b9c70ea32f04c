//! Command-line front end for the `fisher-harnack` checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use fisher_harnack::Error;
use thiserror::Error as ThisError;

pub use config::RunConfig;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for numerical failures met while running a check, 2 for anything
    /// wrong with the request itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                Error::StabilityViolation { .. }
                | Error::RangeViolation(_)
                | Error::NonpositiveField { .. }
                | Error::IntegrationFailure { .. }
                | Error::BracketFailure { .. },
            ) => 1,
            _ => 2,
        }
    }
}

/// Where reports go: files under `--out` when given, stdout otherwise.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: Option<PathBuf>,
}

impl Sink {
    fn write_file(&self, dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })
    }

    /// Text reports always reach stdout and are also saved under `--out`.
    pub fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        print!("{body}");
        match &self.dir {
            Some(dir) => self.write_file(dir, name, body),
            None => Ok(()),
        }
    }

    /// CSV goes to a file under `--out`, or to stdout without one.
    pub fn csv(&self, name: &str, body: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(dir) => self.write_file(dir, name, body),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }

    /// The resolved configuration, as `run_manifest.txt` or on stderr.
    pub fn manifest(&self, body: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(dir) => self.write_file(dir, "run_manifest.txt", body),
            None => {
                for line in body.lines() {
                    eprintln!("# {line}");
                }
                Ok(())
            }
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violation,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Violation
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Violation => 1,
        }
    }
}
