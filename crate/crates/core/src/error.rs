use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown router `{0}` (expected centroid, centermass, vector or epidemic, optionally with -noisy)")]
    UnknownRouter(String),

    #[error("event log line {line}: {message}")]
    EventLog { line: usize, message: String },

    #[error("sweep cell {cell} failed: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<SimError>,
    },
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
