//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Library-wide error type.
///
/// The variants mirror the failure classes of the public operations:
/// invalid inputs (`Domain`, `Parameter`), resource limits (`Resource`),
/// unmet accuracy targets (`Precision`, `Truncation`), and numerical
/// pathologies detected at run time (`Degeneracy`, `Numerical`,
/// `Consistency`, `Internal`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("degeneracy error: {0}")]
    Degeneracy(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
