use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A potentially unbounded loop ran into its step budget.
    #[error("step cap of {cap} exhausted in {context}")]
    CapExhausted { cap: u64, context: String },

    #[error("truncation mass {mass:e} exceeds tolerance {tolerance:e}")]
    Truncation { mass: f64, tolerance: f64 },

    #[error("enumeration depth {n} exceeds the supported maximum {max}")]
    EnumerationTooLarge { n: u64, max: u64 },

    #[error("path too short: needed {needed} {what} steps, found {found}")]
    PathTooShort {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    /// An identity that holds as a theorem failed; indicates a bug.
    #[error("identity violated: {0}")]
    Violation(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
