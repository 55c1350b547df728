use thiserror::Error;

/// Errors raised by the geometric and numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("projection mismatch: {0}")]
    ProjectionMismatch(String),

    #[error("not a core element: {0}")]
    NotCore(String),

    #[error("singular {what} at {witness:?} (condition number {condition:.3e})")]
    Singular {
        what: String,
        witness: Vec<f64>,
        condition: f64,
    },

    #[error("rank deficient {what}: rank {rank}, expected {expected}")]
    RankDeficient {
        what: String,
        rank: usize,
        expected: usize,
    },

    #[error("ill-defined {what}: lift dependence {deviation:.3e} exceeds {tolerance:.1e}")]
    IllDefined {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("path dependence {deviation:.3e} exceeds {tolerance:.1e} at {witness:?}")]
    PathDependent {
        deviation: f64,
        tolerance: f64,
        witness: Vec<f64>,
    },

    #[error("subspace is not coisotropic")]
    NotCoisotropic,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
