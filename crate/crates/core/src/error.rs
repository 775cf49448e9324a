use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown group id `{0}` (expected one of z1..z6, heis3, fnil2-2, fnil2-3, filiform4)")]
    UnknownGroup(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("coordinate overflow while multiplying group elements")]
    Overflow,

    #[error("distance exceeds radius cap {cap}")]
    CapExceeded { cap: u32 },

    #[error("memory budget of {budget} entries exceeded")]
    BudgetExceeded { budget: usize },

    #[error("word does not represent the identity: {0}")]
    NotALoop(String),

    #[error("no central extension is registered for group `{0}`")]
    NoExtension(String),

    #[error("no filler is implemented for group `{0}`")]
    NoFiller(String),

    #[error("rejection sampler gave up after {attempts} attempts")]
    AttemptsExhausted { attempts: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
