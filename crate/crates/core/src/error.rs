use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tree reached the cap of {cap} nodes before the stopping clock fired{}", replicate_suffix(*.replicate))]
    CapExceeded { cap: u64, replicate: Option<u64> },

    #[error("exact table covers sizes up to {have}, but size {needed} was requested")]
    TableTooShort { needed: u64, have: u64 },

    #[error("distribution cap {cap} exceeds the configured limit {limit}")]
    CapTooLarge { cap: usize, limit: usize },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("sample is degenerate (scale {scale} is not a usable positive number)")]
    DegenerateSample { scale: f64 },

    #[error("cannot merge summaries of different quantities: {left:?} vs {right:?}")]
    ConfigMismatch { left: String, right: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("replicate {replicate}: identity check failed: {detail}")]
    IdentityViolation { replicate: u64, detail: String },

    #[error("malformed split sequence: {0}")]
    MalformedSplits(String),
}

fn replicate_suffix(r: Option<u64>) -> String {
    match r {
        Some(r) => format!(" (replicate {r})"),
        None => String::new(),
    }
}
