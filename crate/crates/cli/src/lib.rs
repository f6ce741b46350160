//! Command-line front end for the k-personalized roommates solver: file
//! formats, subcommands and the benchmark harness.

pub mod bench;
pub mod cli;
pub mod format;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub use cli::{run, Cli};

/// Process exit status. No other codes are ever produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    /// Stable matching found, or the given matching is stable.
    Success = 0,
    /// Proven unsatisfiable, or the matching is blocked.
    Negative = 1,
    /// Bad flags, unreadable or invalid input.
    InputError = 2,
    /// Search budget exhausted before an answer.
    Budget = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] ksrti_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes through a temporary file in the target directory, then renames.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
