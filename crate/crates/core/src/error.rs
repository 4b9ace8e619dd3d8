use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("read failed at byte offset {offset}: {source}")]
    Input {
        offset: u64,
        #[source]
        source: io::Error,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("corpus is empty after cleanup")]
    EmptyCorpus,

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("slope {slope} incompatible with Zipf (must be < -1)")]
    SlopeIncompatible { slope: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("session exceeded retry cap after {asks} asks; every proposal rejected")]
    BannedExhaustion { asks: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Input,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Argument(_) => ErrorKind::Usage,
            Error::Input { .. }
            | Error::Parse { .. }
            | Error::EmptyCorpus
            | Error::InvalidTable(_)
            | Error::Io(_) => ErrorKind::Input,
            Error::Fit(_)
            | Error::SlopeIncompatible { .. }
            | Error::Numeric(_)
            | Error::BannedExhaustion { .. } => ErrorKind::Numeric,
        }
    }
}
