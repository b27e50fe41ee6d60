use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum MkError {
    #[error("scope must not be empty")]
    EmptyScope,
    #[error("variable X{0} is unknown or out of range")]
    UnknownVariable(u16),
    #[error("variable X{0} appears twice in scope")]
    DuplicateVariable(u16),
    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),
    #[error("no samples and zero pseudocount")]
    NoSamples,
    #[error("table is too large: {vars} variables exceed the cap of {cap}")]
    TableCap { vars: usize, cap: usize },
    #[error("not a {1}-tree: {0}")]
    NotAKTree(String, usize),
    #[error("invalid creation order: {0}")]
    InvalidOrder(String),
    #[error("n = {n} exceeds the oracle cap {cap}")]
    OracleCap { n: usize, cap: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("evidence has probability zero under the model")]
    ZeroProbabilityEvidence,
    #[error("no spanning {k}-tree contains the required edges")]
    NoRetainingKTree { k: usize },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MkError>;
