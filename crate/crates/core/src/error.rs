use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported field degree {0} (expected 1..=16)")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#x} is not irreducible of degree {degree}")]
    ReducibleModulus { degree: u32, poly: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("no element of order {order} in GF(2^{degree})")]
    NoSuchElement { degree: u32, order: u32 },
    #[error("symbol length {0} is not admissible (need even L, L+1 prime, 2 primitive mod L+1); admissible: {1}")]
    InadmissibleLength(u32, String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index ({0}, {1}) out of range")]
    IndexOutOfRange(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("packet shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("packet holds {found}-bit symbols, operation needs {expected}-bit symbols")]
    WrongState { expected: u32, found: u32 },
    #[error("invalid zero probability {0}")]
    InvalidP0(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("series did not converge below {eps:e} within {d_max} terms")]
    NonConvergence { eps: f64, d_max: usize },
    #[error("decoder assertion failed: {0}")]
    AssertionFailure(String),
}
