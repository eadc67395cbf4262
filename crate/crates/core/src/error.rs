use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus loading, checkpointing and the recommenders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("group needs at least two members")]
    GroupTooSmall,

    #[error("members without any friend in the group: {0:?}")]
    IsolatedMembers(Vec<u32>),

    #[error("emission group {0}: value arrays have mismatched lengths")]
    EmissionLength(String),
}

pub type Result<T> = std::result::Result<T, Error>;
