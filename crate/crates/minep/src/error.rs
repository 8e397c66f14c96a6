use thiserror::Error;

/// Errors surfaced by the solver and certification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("player index {0} out of range (game has {1} players)")]
    PlayerIndex(usize, usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "diagonal block Q[{player}][{player}] is not positive definite (lambda_min = {lambda_min})"
    )]
    NotPositiveDefinite { player: usize, lambda_min: f64 },

    #[error("player {0} has an infeasible strategy set")]
    Infeasible(usize),

    #[error("game is not strongly monotone (mu = {0})")]
    NotStronglyMonotone(f64),

    #[error("structural precondition violated: {0}")]
    Structure(String),

    #[error("{0} must be in (1, 1/alpha = {1})")]
    GammaRange(f64, f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("branch-and-bound node budget of {0} exceeded")]
    NodeBudget(usize),

    #[error("starting point infeasible: {0}")]
    StartingPoint(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
