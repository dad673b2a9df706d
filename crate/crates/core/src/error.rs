use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },
    #[error("non-finite value at position {index}")]
    NonFiniteValue { index: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("degenerate sample: all observations are equal")]
    DegenerateSample,
    #[error("polynomial order {order} outside supported range 0..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("derivative order {nu} exceeds polynomial order {p}")]
    DerivativeOrder { nu: usize, p: usize },
    #[error("singular local fit at x = {x}, h = {h} (condition estimate {condition:.3e})")]
    SingularFit { x: f64, h: f64, condition: f64 },
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite quantity: {0}")]
    NonFinite(String),
    #[error("estimation failed at every evaluation point")]
    AllPointsFailed,
    #[error("zero standard error at grid point {x}")]
    ZeroStandardError { x: f64 },
}
