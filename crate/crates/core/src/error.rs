use std::path::PathBuf;

use thiserror::Error;

use crate::model::Bounds;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems found while reading or constructing an instance from raw data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("invalid topic index {value} for student {student} (topics are 1..={topics})")]
    InvalidTopicIndex {
        student: usize,
        value: i64,
        topics: usize,
    },
    #[error("duplicate student id {0:?}")]
    DuplicateStudentId(String),
    #[error("duplicate wish: student {student} lists topic {topic} more than once")]
    DuplicateWish { student: usize, topic: usize },
    #[error("wish row of student {student} has {found} entries, expected {expected}")]
    WishRowLength {
        student: usize,
        expected: usize,
        found: usize,
    },
    #[error(
        "no priority source: neither a registration-time column nor priority columns are present"
    )]
    NoPrioritySource,
    #[error("expected {expected} priority columns, found {found}")]
    PriorityColumnCount { expected: usize, found: usize },
    #[error("row {row}, column {column:?}: cannot parse {value:?}")]
    BadValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("registration-time tie on topic {topic} between students {first} and {second}")]
    RegistrationTie {
        topic: usize,
        first: usize,
        second: usize,
    },
    #[error("matrix shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("dataset contains no students")]
    Empty,
    #[error("{0}")]
    Csv(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "infeasible: no group count k in 1..={topics} satisfies k*{} <= {students} <= k*{}",
        bounds.lower,
        bounds.upper
    )]
    Infeasible {
        students: usize,
        topics: usize,
        bounds: Bounds,
    },
    #[error("invalid bounds: lower {lower} exceeds upper {upper}")]
    InvalidBounds { lower: usize, upper: usize },
    #[error("ingestion error: {0}")]
    Ingest(#[from] IngestError),
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),
    #[error("incomplete partition: {0}")]
    IncompletePartition(String),
    #[error("empty group for topic {0}")]
    EmptyGroup(usize),
    #[error("no students")]
    NoStudents,
    #[error("guard tripped: {0}")]
    Guard(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line interface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. } => 2,
            Error::Ingest(_) | Error::Csv(_) => 3,
            Error::Guard(_) => 4,
            _ => 1,
        }
    }
}
