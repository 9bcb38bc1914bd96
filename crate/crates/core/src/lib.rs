//! Low-rank positive-semidefinite matrix sensing toolkit.
//!
//! The crate generates measurement ensembles (Wishart, rank-one Gaussian,
//! Pauli), whitens them against a positive-definite certificate, estimates
//! restricted-isometry constants empirically, and recovers the unknown
//! matrix with several solvers (factored gradient descent, projected
//! gradient descent, nuclear-norm continuation, minimum-Frobenius-norm
//! alternating projections, plain least squares).
//!
//! All randomness flows through [`rng::substream`]: a ChaCha8 generator
//! keyed by a `u64` seed with one independent stream per measurement
//! index, so every artifact is byte-reproducible from `(seed, config)`.

pub mod experiments;
pub mod field;
pub mod linalg;
pub mod plot;
pub mod report;
pub mod rip;
pub mod rng;
pub mod sensing;
pub mod solvers;
pub mod transform;

use thiserror::Error;

/// Crate-wide error type.
///
/// [`Error::kind`] classifies each variant as either a configuration
/// problem (rejected input) or a numerical failure (the computation ran
/// and broke down), which is what command-line exit codes key off.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got} in {context}")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("matrix is not positive definite: pivot {pivot} is {value:.3e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigendecomposition failed to converge for {n}x{n} matrix")]
    EigenFailed { n: usize },

    #[error("measurement inner product has non-real part {imag:.3e} (index {index})")]
    NonRealMeasurement { index: usize, imag: f64 },

    #[error("no positive-definite combination of the sensing matrices was found after {tried} attempts")]
    NoPositiveSpan { tried: usize },

    #[error("point is infeasible: measurement residual {residual:.3e} exceeds {tol:.3e}")]
    Infeasible { residual: f64, tol: f64 },

    #[error("solver {solver} diverged after {iters} iterations (residual {residual:.3e})")]
    SolverDiverged {
        solver: &'static str,
        iters: usize,
        residual: f64,
        /// Relative residual per iteration up to the abort.
        history: Vec<f64>,
    },

    #[error("gram matrix is numerically rank-deficient beyond use (condition {cond:.3e})")]
    GramIllConditioned { cond: f64 },

    #[error("rank {r} out of range for {n}x{n} matrices")]
    RankOutOfRange { r: usize, n: usize },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("decode failure: {0}")]
    Decode(String),
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input was rejected before any numerics ran.
    Config,
    /// The computation ran but failed numerically.
    Numerical,
    /// Filesystem or encoding trouble.
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_)
            | Error::DimensionMismatch { .. }
            | Error::RankOutOfRange { .. } => ErrorKind::Config,
            Error::NotPositiveDefinite { .. }
            | Error::EigenFailed { .. }
            | Error::NonRealMeasurement { .. }
            | Error::NoPositiveSpan { .. }
            | Error::Infeasible { .. }
            | Error::SolverDiverged { .. }
            | Error::GramIllConditioned { .. } => ErrorKind::Numerical,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Decode(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub use experiments::{ExperimentName, ExperimentSpec, ResultRow};
pub use field::{Field, ScalarField};
pub use linalg::HermitianMatrix;
pub use sensing::{GroundTruth, SensingFamily, SensingMap};
pub use solvers::{RankBudget, SolverConfig, SolverReport, StepSize};
pub use transform::WhitenedProblem;
