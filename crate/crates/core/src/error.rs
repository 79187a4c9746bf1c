use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^H| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("integrator exceeded {max_steps} steps at t = {t:.6e}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("integrator step size underflow at t = {t:.6e}")]
    StepUnderflow { t: f64 },

    #[error(
        "state invariants violated at t = {t:.6e}: trace drift {trace_drift:.3e}, \
         hermiticity defect {hermiticity:.3e}, min eigenvalue {min_eigenvalue:.3e}"
    )]
    InvariantViolation {
        t: f64,
        trace_drift: f64,
        hermiticity: f64,
        min_eigenvalue: f64,
    },

    #[error("schedule is not cyclic; phase extraction needs a closed loop")]
    NonCyclicSchedule,

    #[error("initial dark/ground coherence {magnitude:.3e} is too small to define a phase")]
    PhaseUndefined { magnitude: f64 },

    #[error("out of validity regime: {0}")]
    OutOfRegime(String),

    #[error("truncation not converged: metric changed by {change:.3e} at n_max + 1")]
    TruncationNotConverged { change: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag for CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not_hermitian",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidState(_) => "invalid_state",
            Error::InvalidParams(_) => "invalid_params",
            Error::MaxStepsExceeded { .. } => "max_steps_exceeded",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::InvariantViolation { .. } => "invariant_violation",
            Error::NonCyclicSchedule => "non_cyclic_schedule",
            Error::PhaseUndefined { .. } => "phase_undefined",
            Error::OutOfRegime(_) => "out_of_regime",
            Error::TruncationNotConverged { .. } => "truncation_not_converged",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::Io(_) => 2,
            Error::OutOfRegime(_) => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
