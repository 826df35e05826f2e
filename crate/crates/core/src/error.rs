use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("algebra instance rejected: {0}")]
    Algebra(String),
    #[error("no quadruple decomposition of the non-harmonic part (residual dimension {0})")]
    Hodge(usize),
    #[error("unknown series variable {0}")]
    UnknownVariable(String),
    #[error("unsupported stratum {name}: {reason}")]
    Unsupported { name: String, reason: String },
    #[error("leaf budget {budget} too small: need {needed}")]
    Budget { budget: usize, needed: usize },
    #[error("rewrite stalled: {0}")]
    Stall(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
