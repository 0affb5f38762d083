use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported wavelet {0:?}; supported: db4, db8")]
    UnsupportedWavelet(String),

    #[error("invalid wavelet filter {name}: {reason}")]
    InvalidFilter { name: String, reason: String },

    #[error("signal of length {len} is too short for depth {depth} with {taps}-tap filter; required minimum length is {required}")]
    SignalTooShort {
        len: usize,
        depth: usize,
        taps: usize,
        required: usize,
    },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("empty signal")]
    EmptySignal,

    #[error("decomposition was produced by {expected}, cannot invert with {found}")]
    FilterMismatch { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("record {record}: {message}")]
    Record { record: String, message: String },

    #[error("class {label} has {count} members, fewer than required {required}")]
    ClassTooSmall {
        label: String,
        count: usize,
        required: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("row width {found} does not match model width {expected}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("player {player} is already a member of the coalition")]
    PlayerInCoalition { player: usize },

    #[error("exact Shapley value limited to {ceiling} players, game has {players}; use the multi-perturbation estimator")]
    TooManyPlayers { players: usize, ceiling: usize },

    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error in {path}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(record: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Record {
            record: record.into(),
            message: message.into(),
        }
    }
}
