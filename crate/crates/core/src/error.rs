use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("coordinate {index} = {value} outside open interval ({lo}, {hi})")]
    OutsideChart {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("degenerate solution: |det| = {det:e} below threshold {threshold:e}")]
    DegenerateSolution { det: f64, threshold: f64 },

    #[error("energy drift {drift:e} at step {step} exceeds limit {limit:e}")]
    EnergyDrift { step: usize, drift: f64, limit: f64 },

    #[error("rank-deficient least squares system: {0}")]
    RankDeficient(String),

    #[error("invalid profile function: {0}")]
    InvalidProfile(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("at grid point {point}: {source}")]
    AtGridPoint {
        point: f64,
        #[source]
        source: Box<Error>,
    },
}
