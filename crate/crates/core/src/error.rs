use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: wrong dimension, invalid probability vector, bad index.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Emission matrix column does not sum to one.
    #[error("emission matrix column {column} sums to {sum}, expected 1")]
    ColumnNotStochastic { column: usize, sum: f64 },

    /// Density evaluated where it diverges.
    #[error("domain error: {0}")]
    Domain(String),

    /// A combinatorial computation was asked to exceed its configured cap.
    #[error("size cap exceeded: {what} is {actual}, limit {limit}")]
    SizeCap {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    /// Numerical degeneracy such as an underflowing normaliser.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
