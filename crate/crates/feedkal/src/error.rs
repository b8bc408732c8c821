use thiserror::Error;

/// Errors produced by model construction, filtering, simulation, and the
/// command-line harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A system definition violates one or more structural invariants; the
    /// message lists every violation found.
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// Matrix or vector dimensions do not match the system they are used with.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A covariance that must be positive semidefinite is not, beyond the
    /// tolerance that absorbs floating-point noise.
    #[error("{name} is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { name: String, min_eig: f64 },

    /// A covariance block that must be inverted (the innovation covariance,
    /// or the conditioning block of a joint Gaussian) is singular or too
    /// ill-conditioned to invert reliably.
    #[error("singular innovation covariance: {block} exceeds the condition bound")]
    SingularInnovation { block: String },

    /// NaN or infinity where a finite value is required.
    #[error("non-finite values in {0}")]
    NonFinite(String),

    /// Two sequences that must run in lockstep have different lengths.
    #[error("length mismatch: expected {expected} elements, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The covariance fixed-point iteration hit its iteration cap before the
    /// update fell below tolerance.
    #[error(
        "Riccati iteration did not converge after {iterations} iterations \
         (last update {residual:.3e})"
    )]
    RiccatiNotConverged { iterations: usize, residual: f64 },

    /// A covariance supplied as a steady-state solution does not actually
    /// satisfy the fixed-point equation.
    #[error("Riccati residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    /// An argument outside its admissible range (non-positive step size,
    /// empty estimator selection, too few steps for the burn-in, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A system definition file is structurally malformed (ragged rows,
    /// missing required keys, wrong value types).
    #[error("system file: {0}")]
    SystemFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
