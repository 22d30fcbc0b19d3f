use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("invalid share count: S = {shared} exceeds n = {n}")]
    InvalidShare { shared: u32, n: u32 },
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("key block of {bits} bits cannot be split for this MAC configuration")]
    KeyTooShort { bits: usize },
    #[error("toy block length r = {0} exceeds the exhaustive-search limit of 20 bits")]
    RTooLarge(u32),
    #[error("length mismatch: {left} bits vs {right} bits")]
    LengthMismatch { left: usize, right: usize },
    #[error("parameter fingerprint of the signed message does not match the verifier")]
    FingerprintMismatch,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no feasible (S, V_C) pair for n = {n}, r = {r}")]
    EmptyFeasibleSet { n: u32, r: u32 },
    #[error("no admissible block count divides L = {0}")]
    NoDivisors(u64),
    #[error("unknown figure identifier `{0}`")]
    UnknownFigure(String),
    #[error("the number of injected errors must be at least one")]
    EEqualsZero,
    #[error("targets cannot be met: {0}")]
    InfeasibleTargets(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
