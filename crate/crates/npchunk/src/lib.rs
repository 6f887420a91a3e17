//! File IO, configuration files and parallel drivers around
//! [`npchunk_core`].
//!
//! The core crate is pure computation over in-memory data; this crate adds
//! everything that touches the operating system: reading and writing the
//! corpus, model and report files, the flat `key = value` configuration
//! format, and thread-capped parallel execution of cross-validation folds
//! and per-representation training.

pub use npchunk_core as core;

pub mod config;
pub mod io;
pub mod parallel;

use std::path::PathBuf;

use npchunk_core::corpus::CorpusError;
use npchunk_core::learner::PersistError;
use npchunk_core::pipeline::PipelineError;

/// Everything that can go wrong on the way in or out of a run. All file
/// errors carry the offending path; format errors carry line numbers from
/// the underlying parsers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {error}")]
    Corpus { path: PathBuf, error: CorpusError },
    #[error("{path}: {error}")]
    Model { path: PathBuf, error: PersistError },
    #[error("{path}:{line}: {reason}")]
    Config {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}
