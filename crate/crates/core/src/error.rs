use thiserror::Error;

/// Every failure mode reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension N = {0} must be an integer >= 2")]
    DimensionViolation(f64),
    #[error("diffusion exponent m = {m} must satisfy 1 < m < N = {n}")]
    MViolation { m: f64, n: f64 },
    #[error("no admissible regime for (N, m, p, q) = ({n}, {m}, {p}, {q})")]
    RegimeViolation { n: f64, m: f64, p: f64, q: f64 },
    #[error("operation requires the {expected} regime")]
    WrongRegime { expected: &'static str },
    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("invalid integration span [{0}, {1}]")]
    InvalidSpan(f64, f64),
    #[error("state became non-finite at r = {0}")]
    NonfiniteState(f64),
    #[error("scaling factor must be positive, got {0}")]
    NonpositiveLambda(f64),
    #[error("inadmissible data at infinity: l = {l}, c = {c}")]
    SignViolation { l: f64, c: f64 },
    #[error("u' = 0 maps onto an axis of the phase plane")]
    DegenerateGradient,
    #[error("phase point ({x}, {z}) is outside the region XZ > 0")]
    InadmissiblePoint { x: f64, z: f64 },
    #[error("stable manifold of A0 did not reach N0: {0}")]
    ManifoldEscape(String),
    #[error("orbit could not be classified: {0}")]
    Unclassifiable(String),
    #[error("r = {0} lies outside the domain of the explicit solution")]
    OutOfDomain(f64),
    #[error("explicit solution lost positivity at r = {0}")]
    PositivityLost(f64),
    #[error("argument must be nonnegative, got {0}")]
    NegativeInput(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("extrapolation differences are growing")]
    Divergent,
    #[error("power-law fit requires positive values")]
    NonpositiveValues,
    #[error("rate check does not apply: {0}")]
    WrongClassification(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
