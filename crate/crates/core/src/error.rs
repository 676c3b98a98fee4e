//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("multiplier symbol: {0}")]
    Symbol(String),
    #[error("parameters: {0}")]
    Params(String),
    #[error("amplitude positivity violated: {0}")]
    Positivity(String),
    #[error("internal consistency: {0}")]
    Assembly(String),
    #[error("band leakage: {0}")]
    Leakage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
