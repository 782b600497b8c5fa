use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series does not terminate: no upper parameter is a nonpositive integer")]
    NonTerminating,
    #[error("lower parameter {0} hits a pole before the series terminates")]
    PoisonedDenominator(String),
    #[error("{what} out of range: {value} not in 0..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid cycle type: {0}")]
    InvalidCycleType(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("quadrature did not converge (estimate {estimate}, error bound {error})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
