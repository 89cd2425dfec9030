use thiserror::Error;

use crate::functional::Regime;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variants map one-to-one onto the
/// error classes used in reports and CLI exit codes (see [`Error::class`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain bounds out of order: left = {left} must be < right = {right}")]
    BadBounds { left: f64, right: f64 },

    #[error("fractional order window violated: need p*s < 1 < 2*p*s, got p*s = {ps}")]
    OrderWindow { ps: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("function lives on a grid with {found} nodes, expected {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("weight `{expression}` is not finite at x = {x}")]
    Eval { expression: String, x: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires regime {expected}, problem is {found}")]
    WrongRegime { expected: &'static str, found: Regime },

    #[error("threshold {name} is not defined in regime {found}")]
    RegimeMismatch { name: &'static str, found: Regime },

    #[error("the zero function is not admissible here")]
    ZeroFunction,

    #[error("direction has the wrong sign class: {0}")]
    WrongClass(String),

    #[error("fiber line lambda*F = {line} misses the range of psi")]
    NoRoot { line: f64 },

    #[error("lambda = {lambda} is not below {name} = {value}")]
    ThresholdExceeded {
        name: &'static str,
        value: f64,
        lambda: f64,
    },

    #[error("branch not admissible: {0}")]
    NotAdmissible(String),

    #[error("no sampled start direction admits the {0} branch")]
    NoAdmissibleStart(&'static str),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConverged {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("constraint set is empty: no sampled direction has a positive weighted integral")]
    Infeasible,

    #[error("seminorm increased under |u|: {before:e} -> {after:e}")]
    EnergyIncreased { before: f64, after: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

impl Error {
    /// Stable upper-snake-case class name, used in report flags.
    pub fn class(&self) -> &'static str {
        match self {
            Error::BadBounds { .. } => "BAD_BOUNDS",
            Error::OrderWindow { .. } => "ORDER_WINDOW",
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::GridMismatch { .. } => "GRID_MISMATCH",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Eval { .. } => "EVAL_ERROR",
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::WrongRegime { .. } => "WRONG_REGIME",
            Error::RegimeMismatch { .. } => "REGIME_MISMATCH",
            Error::ZeroFunction => "ZERO_FUNCTION",
            Error::WrongClass(_) => "WRONG_CLASS",
            Error::NoRoot { .. } => "NO_ROOT",
            Error::ThresholdExceeded { .. } => "THRESHOLD_EXCEEDED",
            Error::NotAdmissible(_) => "NOT_ADMISSIBLE",
            Error::NoAdmissibleStart(_) => "NO_ADMISSIBLE_START",
            Error::NonConverged { .. } => "NONCONVERGED",
            Error::Infeasible => "INFEASIBLE",
            Error::EnergyIncreased { .. } => "ENERGY_INCREASED",
            Error::InvariantViolation(_) => "INVARIANT_VIOLATION",
            Error::Io(_) => "IO_ERROR",
            Error::Validation(_) => "VALIDATION_ERROR",
        }
    }

    /// Process exit status for the CLI. Zero is reserved for success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::Validation(_)
            | Error::Parse { .. }
            | Error::Eval { .. }
            | Error::InvalidParams(_)
            | Error::BadBounds { .. }
            | Error::OrderWindow { .. }
            | Error::InvalidGrid(_) => 3,
            Error::WrongRegime { .. } | Error::RegimeMismatch { .. } => 4,
            Error::NonConverged { .. } => 5,
            Error::NoRoot { .. }
            | Error::ThresholdExceeded { .. }
            | Error::NotAdmissible(_)
            | Error::NoAdmissibleStart(_)
            | Error::Infeasible
            | Error::WrongClass(_)
            | Error::ZeroFunction => 6,
            Error::EnergyIncreased { .. }
            | Error::InvariantViolation(_)
            | Error::GridMismatch { .. } => 7,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
