use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("register name collision: `{0}`")]
    NameCollision(String),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid {kind}: {reason}")]
    Validity { kind: &'static str, reason: String },

    #[error("channel is not CPTP: {constraint} violated by {violation:.3e}")]
    NotCptp {
        constraint: &'static str,
        violation: f64,
    },

    #[error("dimension {needed} exceeds the dense budget of {limit}")]
    Capacity { needed: usize, limit: usize },

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("structure error: {0}")]
    Structure(String),
}

impl Error {
    pub(crate) fn validity(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Validity {
            kind,
            reason: reason.into(),
        }
    }

    /// True for errors caused by exceeding a size or evaluation budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::Budget(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
