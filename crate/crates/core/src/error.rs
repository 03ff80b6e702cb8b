use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an estimator (empty series, zero weights, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    /// An event earlier than the last one seen on the same stream.
    #[error("ordering error at {context}: time {time} precedes {previous}")]
    Ordering {
        context: String,
        time: i64,
        previous: i64,
    },

    #[error("no past price for the tick at time {tick_time} shifted by {shift}")]
    MissingPastPrice { tick_time: i64, shift: String },

    #[error("insufficient inventory for investor {investor}: short {shortfall} shares")]
    InsufficientInventory { investor: String, shortfall: f64 },

    /// A decomposed variance fell below the floating-point noise floor.
    #[error("negative variance {value:e} exceeds noise tolerance {tolerance:e}")]
    NegativeVariance { value: f64, tolerance: f64 },

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: u64,
        column: String,
        reason: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
