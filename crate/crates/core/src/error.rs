use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} {value} out of range (max {max})")]
    Range {
        what: &'static str,
        value: u32,
        max: u32,
    },

    #[error("framing error: {0}")]
    Framing(&'static str),

    #[error("checksum mismatch: expected {expected:#04x}, got {actual:#04x}")]
    Checksum { expected: u8, actual: u8 },

    #[error("trace line {line}: {message}")]
    TraceFormat { line: usize, message: String },

    #[error("invalid slider layout: {0}")]
    Layout(String),
}

impl Error {
    pub(crate) fn range(what: &'static str, value: impl Into<u32>, max: impl Into<u32>) -> Self {
        Error::Range {
            what,
            value: value.into(),
            max: max.into(),
        }
    }
}
