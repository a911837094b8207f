use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse failure at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{location}: self-loop on vertex {vertex}")]
    SelfLoop { location: String, vertex: String },

    #[error("{location}: duplicate edge ({u}, {v})")]
    DuplicateEdge {
        location: String,
        u: String,
        v: String,
    },

    #[error("{location}: duplicate vertex {id}")]
    DuplicateVertex { location: String, id: String },

    #[error("wrong terminal count: expected 2, found {found}")]
    WrongTerminalCount { found: usize },

    #[error("{location}: negative latency {latency}")]
    NegativeLatency { location: String, latency: f64 },

    #[error("{location}: unknown vertex {id}")]
    UnknownVertex { location: String, id: String },

    #[error("{location}: invalid vertex identifier {id:?} (allowed: ASCII letters, digits, '_' and '.')")]
    InvalidIdentifier { location: String, id: String },

    #[error("{location}: probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { location: String, value: f64 },

    #[error("{location}: unknown edge ({u}, {v})")]
    UnknownEdge {
        location: String,
        u: String,
        v: String,
    },

    #[error("vertex {id} is not a secondary site")]
    NotSecondary { id: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{n} variables exceeds the limit of {limit}")]
    TooManyVariables { n: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
