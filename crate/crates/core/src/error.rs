use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid weight `{text}`: {reason}")]
    Weight { text: String, reason: String },

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("operation `{op}` expects {expected} argument(s), got {found}")]
    Arity {
        op: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown operation `{0}`")]
    UnknownOp(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("unbound label metavariable `@{0}`")]
    UnboundMetavar(String),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("rule set cannot be executed: {0}")]
    NotExecutable(String),

    #[error("carrier size {size} exceeds the limit of {limit}")]
    CarrierTooLarge { size: usize, limit: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
