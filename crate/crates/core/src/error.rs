use crate::expr::{EvalError, ParseError};

/// Errors raised by the numerical and geometric layers.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Parse { context: String, source: ParseError },
    #[error("{context} at x = {x}: {source}")]
    Eval { context: String, x: f64, source: EvalError },
    #[error("{context} at u = {point:?}: {source}")]
    PointEval { context: String, point: Vec<f64>, source: EvalError },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("test function leaves the chart: {constraint} violated at x = {x}, u = {point:?}")]
    ImageEscapesOmega { constraint: String, x: f64, point: Vec<f64> },
    #[error("jet order {requested} exceeds generated order {available}")]
    OrderTooHigh { requested: usize, available: usize },
    #[error("missing derivative channel: {0}")]
    MissingDerivative(String),
    #[error("metric singular at u = {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn eval(context: impl Into<String>, x: f64, source: EvalError) -> Self {
        Error::Eval { context: context.into(), x, source }
    }
}
