use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence is empty")]
    EmptySequence,

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid dichotomic value {0}, expected -1 or +1")]
    InvalidDichotomic(i64),

    #[error("invalid sequence character {0:?}, expected '+' or '-'")]
    InvalidSignChar(char),

    #[error("block [{offset}, {offset}+{len}) out of range for sequence of length {total}")]
    BlockOutOfRange {
        offset: usize,
        len: usize,
        total: usize,
    },

    #[error("correlation {name} = {value} is outside [-1, 1]")]
    CorrelationOutOfRange { name: String, value: f64 },

    #[error("correlation {0} is not populated")]
    Unpopulated(&'static str),

    #[error("coupling {0} is outside [0, 1]")]
    CouplingOutOfRange(f64),

    #[error("malformed correlation target: {0}")]
    MalformedTarget(String),

    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),

    #[error("no triggering block within {0} blocks")]
    ScanLimitExceeded(u64),

    #[error("signatures were produced with different parameters")]
    ParamsMismatch,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
