use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("division by zero")]
    DivideByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid kernel row at state `{state}`, action `{action}`: {msg}")]
    InvalidKernel { state: String, action: String, msg: String },
    #[error("reward out of [0,1] at state `{state}`, action `{action}`: {value}")]
    RewardOutOfRange { state: String, action: String, value: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("extraction failed: no mass on valid strategies of player {player}")]
    ZeroSupportOnValidStrategies { player: usize },
    #[error("missing value for node `{0}`")]
    MissingNodeValue(String),
    #[error("degenerate game: {0}")]
    Degenerate(String),
    #[error("parse error on line {line}: {msg}")]
    File { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
