use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid LCG seed {r} with multiplier {theta}: {reason}")]
    InvalidSeed { r: u64, theta: u64, reason: &'static str },

    #[error("invalid range: lower bound {a} must be below upper bound {b}")]
    InvalidRange { a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("{path}:{line}: cannot parse field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("competitor constants do not match this instance/decay model: {0}")]
    ConstantsMismatch(String),

    #[error("chain has no facilities")]
    EmptyChain,

    #[error("objective is not finite at the start layout")]
    NonFiniteObjective,

    #[error("all {0} starts failed")]
    AllStartsFailed(usize),

    #[error("solution value {claimed} does not match re-evaluated share {actual}")]
    InconsistentSolution { claimed: f64, actual: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
