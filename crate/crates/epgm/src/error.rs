use std::path::PathBuf;

/// Errors produced by graph I/O, model fitting, and analytics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected integer node id, got {token:?}")]
    Parse {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid binding parameters: {0}")]
    InvalidBinding(String),
    #[error("node {0} missing from partition")]
    MissingPartition(usize),
    #[error("overlap is undefined: mean edge count is zero")]
    UndefinedOverlap,
    #[error("class-pair probability is not well-defined for the Kronecker model")]
    UnsupportedClassQuery,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
