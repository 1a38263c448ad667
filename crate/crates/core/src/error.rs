use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DiscError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DiscError {
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed delimited text")]
    Csv(#[from] csv::Error),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` row {row}: `{value}` is not a number")]
    NotNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("requested {k} clusters but only {available} distinct rows exist")]
    NotEnoughDistinctRows { k: usize, available: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}
