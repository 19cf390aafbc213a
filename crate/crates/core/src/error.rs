use std::fmt;

use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which grid function a non-finite value was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Psi,
    U,
    Y,
    V,
    Z,
    Kernel0,
    Kernel1,
    Delay,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quantity::Psi => "Psi",
            Quantity::U => "U",
            Quantity::Y => "Y",
            Quantity::V => "V",
            Quantity::Z => "Z",
            Quantity::Kernel0 => "k0",
            Quantity::Kernel1 => "k1",
            Quantity::Delay => "phi",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 2 subintervals, got {0}")]
    TooFewSubintervals(usize),

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{what} = {value} lies outside [0, 1]")]
    OutsideUnitInterval { what: &'static str, value: f64 },

    #[error("non-finite entry at index {0}")]
    NonFiniteEntry(usize),

    #[error("non-finite {quantity} at node {node} (x = {x})")]
    NonFinite {
        quantity: Quantity,
        node: usize,
        x: f64,
    },

    #[error("iteration diverged at step {iteration}: max |Psi| = {norm:e}")]
    Divergence { iteration: usize, norm: f64 },

    #[error("stopping rule exact-h2 requires a problem with an exact solution")]
    MissingExact,

    #[error("unknown built-in problem `{0}`")]
    UnknownProblem(String),

    #[error("field `{field}`: {source}")]
    Field {
        field: &'static str,
        #[source]
        source: ExprError,
    },

    #[error("boundary data must have 4 entries, got {0}")]
    BoundaryLength(usize),

    #[error("problem validation failed: {0}")]
    Validation(String),

    #[error("malformed problem config: {0}")]
    Config(#[from] serde_json::Error),

    #[error("certificate is not contractive (q = {0})")]
    NotContractive(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
