use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("incomparable ring sizes: {0} vs {1}")]
    IncomparableRings(usize, usize),

    #[error("view at empty node {0}")]
    EmptyNode(usize),

    #[error("node {node} out of range for ring of size {n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("configuration has no robots")]
    EmptyConfiguration,

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("initial configuration is not towerless: {0}")]
    NotTowerless(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("rule conflict on view {view}: rules {labels:?} all match")]
    RuleConflict { view: String, labels: Vec<String> },

    #[error("view length {got} does not match protocol radius {phi}")]
    ViewLength { got: usize, phi: usize },

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("illegal scheduler choice: {0}")]
    IllegalChoice(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("robot count {k} exceeds ring size {n}")]
    TooManyRobots { k: usize, n: usize },

    #[error("trace error: {0}")]
    Trace(String),
}
