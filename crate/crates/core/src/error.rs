use thiserror::Error;

/// Errors raised by the model and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `v_n = 0` for every cell, so hopping ratios are undefined.
    #[error("degenerate ratios: cos(theta) = 0 makes every intracell hopping vanish")]
    DegenerateRatios,

    /// The zero-mode recursion divides by `v_n`, which vanishes at cos(theta) = 0.
    #[error("recursion pivot vanishes: cos(theta) = 0")]
    PivotVanishes,

    /// A computation produced a non-finite value or failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A dense routine was asked to handle a sector larger than it supports.
    #[error("size {n} exceeds the limit {max} for {what}")]
    Size { what: &'static str, n: usize, max: usize },

    /// The configuration is valid but not implemented.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
