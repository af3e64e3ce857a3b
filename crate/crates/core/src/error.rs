use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("unknown scheme '{0}' (try `schemes list`)")]
    UnknownScheme(String),

    #[error("max_order must lie in [1, 10], got {0}")]
    TreeOrder(usize),

    #[error("stage matrix singular at sigma = {sigma}")]
    Singular { sigma: f64 },

    #[error("quadrature did not converge: last refinement changed the integral by {delta:e} (estimate {estimate:e})")]
    Quadrature { estimate: f64, delta: f64 },

    #[error("no interior minimum in bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("no solution found after restarts (best residual {best_residual:e})")]
    NoSolution { best_residual: f64 },

    #[error("constraint parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("singular matrix during factorization (pivot {pivot} at row {row})")]
    Factorization { row: usize, pivot: f64 },

    #[error("linear solver did not converge: residual {residual:e} after {iterations} iterations")]
    LinearSolver { residual: f64, iterations: usize },

    #[error("Newton iteration failed at step {step}: residual {residual:e} after {iterations} iterations")]
    Newton { step: usize, residual: f64, iterations: usize },

    #[error("step failure at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time span ({span}) is not an integer multiple of dt ({dt})")]
    StepCount { span: f64, dt: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
