//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability argument fell outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A schedule string did not match the grammar.
    #[error("cannot parse schedule `{input}`: {reason}")]
    ScheduleParse { input: String, reason: String },

    /// An explicit or raw schedule is shorter than the requested height.
    #[error("schedule provides {available} levels but height {height} needs {needed}")]
    ScheduleTooShort { available: usize, needed: usize, height: usize },

    /// The exact reference distribution would exceed its support budget.
    #[error("exact distribution intractable: {0}")]
    OracleBudget(String),

    /// A bound formula does not apply to the given inputs.
    #[error("{0}")]
    BoundInapplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
