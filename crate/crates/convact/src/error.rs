use thiserror::Error;

/// Errors produced by grid checks, admissibility checks and the dense solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two signals or fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A trajectory or variation violates the constraints of its admissible set.
    #[error("admissibility violation: {0}")]
    Admissibility(String),

    /// A constructor argument violates a type invariant.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation's precondition does not hold for the given inputs.
    #[error("precondition violation: {0}")]
    Precondition(String),

    /// The stationarity system is singular or numerically rank-deficient.
    #[error("singular stationarity system (condition estimate {condition_estimate:.3e})")]
    SingularSystem { condition_estimate: f64 },

    /// Guard against accidental huge dense factorizations.
    #[error("free-node count {free_nodes} exceeds the configured cap {cap}")]
    FreeNodeCap { free_nodes: usize, cap: usize },

    /// Experiment configuration failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
