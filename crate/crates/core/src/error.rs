use thiserror::Error;

/// Errors raised by domain construction, oracle access and the algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("assignment does not match the oracle domain: {0}")]
    DomainMismatch(String),

    #[error("malformed variable set: {0}")]
    InvalidSubset(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("codomain mismatch: {0}")]
    CodomainMismatch(String),

    #[error("oracle returned a non-finite value")]
    NonFinite,

    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
