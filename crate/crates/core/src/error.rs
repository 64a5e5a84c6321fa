use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The rumor cannot reach every vertex from the start vertex.
    #[error("not broadcastable: {reachable} of {n} vertices reachable from the start vertex")]
    NotBroadcastable { n: usize, reachable: usize },

    #[error("graph has {n} vertices, exact computation is capped at {cap}")]
    Capacity { n: usize, cap: usize },

    #[error("malformed edge list at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
