use std::fmt;

/// Errors produced by code construction, stream coding and the analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability vector failed validation.
    InvalidPmf(String),
    /// A parameter is outside its documented domain.
    InvalidParameter(String),
    /// The block space `|alphabet|^b` exceeds the configured cap.
    BlockSpaceExceeded { blocks: u128, cap: u128 },
    /// A bit pattern is not a valid codeword of the given code.
    Decode(String),
    /// The waiting-time root search did not converge; carries the last
    /// bracket in `f64` for diagnostics.
    RootSearchFailed {
        last_lo: f64,
        last_hi: f64,
        iterations: u32,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPmf(msg) => write!(f, "invalid pmf: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::BlockSpaceExceeded { blocks, cap } => {
                write!(f, "block space {blocks} exceeds cap {cap}")
            }
            Error::Decode(msg) => write!(f, "decode error: {msg}"),
            Error::RootSearchFailed {
                last_lo,
                last_hi,
                iterations,
            } => write!(
                f,
                "root search did not converge after {iterations} iterations \
                 (last bracket [{last_lo}, {last_hi}])"
            ),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
