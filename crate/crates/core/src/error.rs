use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Undecided` is kept separate from input errors so callers can tell
/// "needs more precision" apart from "bad request".
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("undecided at precision cap of {cap_bits} bits: {what}")]
    Undecided { cap_bits: u64, what: String },

    #[error("index {index} out of range (certified up to {certified_upto})")]
    Range { index: usize, certified_upto: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn undecided(cap_bits: u64, what: impl Into<String>) -> Self {
        Error::Undecided {
            cap_bits,
            what: what.into(),
        }
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::Undecided { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
