use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps these onto a fixed exit-code taxonomy, see [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("q = {0} is not an odd prime in [3, 997]")]
    InvalidField(u64),
    #[error("polynomials over different fields (q = {0} and q = {1})")]
    FieldMismatch(u64, u64),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial {0} is not monic")]
    NotMonic(String),
    #[error("{what} needs about {needed:.3e} elementary operations, budget is {budget:.3e}")]
    BudgetExceeded { what: String, needed: f64, budget: f64 },
    #[error("{0} is a perfect square")]
    PerfectSquare(String),
    #[error("{0} is not squarefree")]
    NotSquarefree(String),
    #[error("precondition violated: {0}")]
    Domain(String),
    #[error("functional equation violated for D = {d} at beta = {beta}")]
    FunctionalEquation { d: String, beta: usize },
    #[error("normalized root off the unit circle: residual {residual:.3e}")]
    UnitModulus { residual: f64 },
    #[error("eigenphase pairing failed: mismatch {0:.3e}")]
    Pairing(f64),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("{what}: accuracy target {target:.1e} not met (estimate {estimate:.3e})")]
    Accuracy { what: String, target: f64, estimate: f64 },
    #[error("test-function supports sum to {total}, must be below {limit}")]
    SupportOverflow { total: f64, limit: f64 },
    #[error("insufficient trace depth: need r up to {need}, have {have}")]
    TraceDepth { need: usize, have: usize },
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::Accuracy { .. } => 4,
            Error::Identity(_)
            | Error::FunctionalEquation { .. }
            | Error::UnitModulus { .. }
            | Error::Pairing(_) => 5,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
