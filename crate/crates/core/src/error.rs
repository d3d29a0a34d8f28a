use thiserror::Error;

/// Errors produced anywhere in the simulation, cutting and measurement pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("capacity exceeded: {requested} qubits requested, memory guard is {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error(
        "unsupported topology: gate {position} connects segments {first} and {second}, \
         which are not adjacent"
    )]
    UnsupportedTopology {
        position: usize,
        first: usize,
        second: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("deadline exceeded")]
    Timeout,

    #[error("degenerate boundary fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
