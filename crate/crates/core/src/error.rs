use thiserror::Error;

/// Error type shared across the lab.
///
/// `Hypothesis` is deliberately distinct from the numerical errors: a check
/// whose standing hypothesis fails (say `sigma_k <= 0` at a quadrature node)
/// is reported, not crashed, and batch drivers map it to its own exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("frame error: {0}")]
    Frame(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("non-finite integrand at node {node}: {detail}")]
    Poisoned { node: usize, detail: String },
    #[error("solver error: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
