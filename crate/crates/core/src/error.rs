use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: file contains no records")]
    EmptyInput { path: PathBuf },

    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    #[error("node `{0}` has a zero-norm embedding row")]
    ZeroRow(String),

    #[error("vocabulary is empty after pruning (min_count = {min_count})")]
    EmptyVocab { min_count: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("sequence length {len} is outside [1, {dim}]")]
    SequenceLength { len: usize, dim: usize },

    #[error("shift {shift} is a multiple of dimension {dim}")]
    DegenerateShift { shift: usize, dim: usize },

    #[error("training produced no pairs")]
    NoPairs,

    #[error("{0}")]
    Data(String),
}

impl Error {
    /// Stable short code used as the prefix of command-line error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Parse { .. } | Error::EmptyInput { .. } => "E_PARSE",
            Error::UnknownNode(_) => "E_UNKNOWN_NODE",
            Error::ZeroRow(_) => "E_ZERO_ROW",
            Error::EmptyVocab { .. } => "E_EMPTY_VOCAB",
            Error::Config(_) => "E_CONFIG",
            Error::Dimension { .. } => "E_DIMENSION",
            Error::SequenceLength { .. } => "E_SEQ_LENGTH",
            Error::DegenerateShift { .. } => "E_SHIFT",
            Error::NoPairs => "E_NO_PAIRS",
            Error::Data(_) => "E_DATA",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
