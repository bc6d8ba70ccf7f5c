use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("action index {index} out of range (action space has {total} actions)")]
    ActionOutOfRange { index: usize, total: usize },

    #[error("link {link} out of range (catalog has {count} links)")]
    LinkOutOfRange { link: usize, count: usize },

    #[error("{what} index {index} out of range for link {link} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        link: usize,
        index: usize,
        limit: usize,
    },

    #[error("feature index {index} out of range for a table of {size} weights")]
    FeatureOutOfRange { index: usize, size: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity violated on link {link}: allocated {allocated} > {capacity}")]
    CapacityViolation {
        link: usize,
        allocated: f64,
        capacity: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("metrics error: {0}")]
    Metrics(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
