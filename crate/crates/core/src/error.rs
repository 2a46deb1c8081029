use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid order k={k} for a dictionary with p={p} atoms (need 1 <= k <= p-1)")]
    InvalidOrder { k: usize, p: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("problem too large: {what} = {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: f64,
        limit: f64,
    },

    #[error("bound inapplicable: {0}")]
    Inapplicable(String),

    #[error("missing required parameter `{0}`")]
    MissingField(&'static str),

    #[error("quadratic form {0:e} is below the PSD floor")]
    NumericalPsd(f64),

    #[error("degenerate pair: dictionaries are closer than {0:e} in the ME norm")]
    DegeneratePair(f64),

    #[error("search failed: best representation error found {best} is below target {target}")]
    SearchFailed { best: f64, target: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
