use std::path::PathBuf;

use thiserror::Error;

use crate::records::RecordId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("header is missing column {0:?}")]
    MissingColumn(String),

    #[error("duplicate record id {0}")]
    DuplicateId(RecordId),

    #[error("row {row}: unparseable record id {value:?}")]
    BadId { row: u64, value: String },

    #[error("row {row}: unparseable date {value:?} (expected YYYY-MM-DD)")]
    BadDate { row: u64, value: String },

    #[error("row {row}: {message}")]
    BadRow { row: u64, message: String },

    #[error("unknown record id {0}")]
    UnknownRecord(RecordId),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("record {id} has {got} attribute values, schema has {expected}")]
    SchemaMismatch {
        id: RecordId,
        got: usize,
        expected: usize,
    },

    #[error("comparison profile references attribute {0:?} not in the schema")]
    UnknownAttribute(String),

    #[error("comparison profile has zero total weight")]
    ZeroTotalWeight,

    #[error("invalid comparator weight {weight} for attribute {attribute:?}")]
    InvalidWeight { attribute: String, weight: f64 },

    #[error("invalid temporal model: {0}")]
    InvalidTemporalModel(String),

    #[error("invalid synthetic config: {0}")]
    InvalidSynthetic(String),

    #[error("record {0} is not a node of the similarity graph")]
    UnknownNode(RecordId),

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(RecordId, RecordId, String),

    #[error("record {0} appears in more than one cluster")]
    OverlappingClusters(RecordId),

    #[error("clustering and ground truth cover different record ids (e.g. {0})")]
    UniverseMismatch(RecordId),

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
