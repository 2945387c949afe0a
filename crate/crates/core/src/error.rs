use thiserror::Error;

/// Errors raised across the toolkit. `Shape` is a dimension mismatch,
/// `Domain` a value outside an operation's domain, `Size` a resource cap,
/// `NonConvergence` an iterative routine that ran out of budget, and
/// `Verification` a violated numerical contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size cap exceeded: {0}")]
    Size(String),
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
