//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Errors raised by the benchmarking toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e} > {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("trace is {trace:.12} instead of 1")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("state vector norm is {norm:.12} instead of 1")]
    NotNormalized { norm: f64 },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },

    #[error("channel row {row} sums to {sum:.12} instead of 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error(
        "fidelity {fidelity} is below the depolarizing-model floor 1/{modes} = {floor:.6}; \
         no p_n in [0,1] produces it"
    )]
    FidelityBelowModelFloor {
        fidelity: f64,
        modes: u32,
        floor: f64,
    },

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("count record {label:?}: {reason}")]
    InvalidRecord { label: String, reason: String },

    /// The inputs are syntactically valid but the model cannot produce a
    /// finite answer (e.g. zero success probability per attempt).
    #[error("entanglement distribution time is infinite: {reason}")]
    InfiniteTime { reason: String },

    /// Eq. for the finite-lifetime correction leaves its validity range.
    #[error("finite-lifetime correction out of model range: {reason}")]
    LifetimeModelOutOfRange { reason: String },

    #[error("estimator undefined: {reason}")]
    UndefinedEstimator { reason: String },

    /// Measured quantities are jointly infeasible under the excitation model.
    #[error("inconsistent count data: {reason}")]
    InconsistentData { reason: String },

    #[error("state invalid for the entanglement bound: B^2 = {b_squared:.6} >= 2")]
    InvalidBoundState { b_squared: f64 },

    #[error("measurement design is rank-deficient (rank {rank} < 4); add independent bases")]
    DegenerateDesign { rank: usize },

    #[error("too many bootstrap resamples failed: {failed} of {total}")]
    BootstrapFailures { failed: usize, total: usize },
}

impl Error {
    /// True for errors meaning "the computation is infeasible on this data",
    /// as opposed to malformed input. CLI maps these to exit code 2.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::InfiniteTime { .. }
                | Error::LifetimeModelOutOfRange { .. }
                | Error::UndefinedEstimator { .. }
                | Error::InconsistentData { .. }
                | Error::InvalidBoundState { .. }
                | Error::BootstrapFailures { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
