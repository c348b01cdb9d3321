use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a projector: {0}")]
    NotProjector(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not maximally entangled (max Schmidt deviation {0:e})")]
    NotMaximallyEntangled(f64),

    #[error("eigensolver failed to converge")]
    Convergence,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("inconsistent oracle: {0}")]
    InconsistentOracle(String),

    #[error("positivity violated for outcome pair ({alpha:+}, {beta:+}): C = {c} outside [{lo}, {hi}]")]
    PositivityViolated {
        alpha: i8,
        beta: i8,
        c: f64,
        lo: f64,
        hi: f64,
    },

    #[error("inconclusive check: {0}")]
    Inconclusive(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),
}
