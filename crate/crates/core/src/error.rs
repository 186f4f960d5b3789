use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive loop hit its term budget before meeting the tolerance.
    #[error("no convergence in {routine}: {detail}")]
    Convergence { routine: &'static str, detail: String },

    /// A table does not reach the lag an operation needs.
    #[error("coverage error: lag {required} required, table covers 0..={available}")]
    Coverage { required: usize, available: usize },

    /// Invalid configuration (spec files, experiment setups).
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
