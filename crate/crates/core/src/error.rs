use crate::numerics::ScalarMode;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cannot {op} a {} scalar with a {} scalar", left.name(), right.name())]
    ModeMismatch { op: &'static str, left: ScalarMode, right: ScalarMode },
    #[error("custom weight table has {len} entries but index {index} was requested")]
    IndexOutOfRange { index: u64, len: usize },
    #[error("weights are not pairwise distinct: {0}")]
    NotDistinct(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("value is not representable in {mode} mode: {what}", mode = mode.name())]
    NotRepresentable { mode: ScalarMode, what: String },
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
