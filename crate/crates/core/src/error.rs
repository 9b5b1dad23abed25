//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time {t} is below the admissible floor t_floor = {t_floor}")]
    TimeBelowFloor { t: f64, t_floor: f64 },

    #[error("position {x} is outside the kernel domain {domain}")]
    OutOfDomain { x: f64, domain: &'static str },

    #[error("finite-difference stencil around (t={t}, x={x}) leaves the admissible region")]
    StencilOutOfDomain { t: f64, x: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not symmetric: |A - A^T| = {deviation:.3e} exceeds {tol:.3e} at ({row}, {col})")]
    NotSymmetric {
        deviation: f64,
        tol: f64,
        row: usize,
        col: usize,
    },

    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:.6e} below -{tol:.3e} (clamp_tol = {clamp_tol:.1e})")]
    NotPsd {
        eigenvalue: f64,
        tol: f64,
        clamp_tol: f64,
    },

    #[error("SVD failed to converge within {max_iterations} iterations")]
    SvdFailed { max_iterations: usize },

    #[error("symmetric eigendecomposition failed to converge within {max_iterations} iterations")]
    EigFailed { max_iterations: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("snapshot times must be strictly increasing: t[{index}] = {t} does not exceed {previous}")]
    NonIncreasingTimes { index: usize, t: f64, previous: f64 },

    #[error("density is negative beyond tolerance on the sampling grid: min value {min_value:.6e}")]
    InvalidDensity { min_value: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("cross-validation fold {fold} is empty (n = {n}, folds = {folds})")]
    EmptyFold { fold: usize, n: usize, folds: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code for the CLI: 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Error {
        let context = context.into();
        move |source| Error::Io { context, source }
    }
}
