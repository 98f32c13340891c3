use thiserror::Error;

/// Errors raised by the simulator, the benchmark builders and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("no path between qubits {0} and {1}")]
    NoPath(usize, usize),
    #[error("circuit width {width} exceeds simulator limit {max}")]
    WidthExceeded { width: usize, max: usize },
    #[error("post-selected branch has probability {0:e}")]
    ZeroBranch(f64),
    #[error("histogram has no valid shots")]
    EmptyHistogram,
    #[error("missing Bell setting {0}")]
    MissingSetting(String),
    #[error("incomplete coverage: {0}")]
    IncompleteCoverage(String),
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),
    #[error("amplitudes are not unit norm (norm^2 = {0})")]
    NormViolation(f64),
    #[error("incomplete tomography batch: {0}")]
    IncompleteBatch(String),
    #[error("singular values too close: {0} and {1}")]
    DegenerateSigmas(f64, f64),
    #[error("phase finding did not converge: {0}")]
    NoConvergence(String),
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("missing benchmark score: {0}")]
    MissingBenchmark(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("malformed job: {0}")]
    MalformedJob(String),
    #[error("timed out waiting for {0}")]
    Timeout(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("image encoding: {0}")]
    Image(String),
}

pub type Result<T> = std::result::Result<T, Error>;
