use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A parameter violates an ordering or range requirement. The message
    /// names the violated inequality.
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("not a probability vector: {0}")]
    NotNormalized(String),
    #[error("test function has sup-norm above 1 (|f({index})| > 1)")]
    SupNormExceeded { index: usize },
    #[error("n = {n} is too large for brute-force enumeration (max {max})")]
    TooLarge { n: usize, max: usize },
    #[error("t = {t} exceeds the exact-oracle limit t_max = {t_max}; use the heuristic mode")]
    ExactLimit { t: usize, t_max: usize },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("malformed LP instance: {0}")]
    MalformedLp(String),
    #[error("soundness violation (implementation bug): {0}")]
    Soundness(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

/// Builds a [`Error::Domain`] naming the violated relation.
pub(crate) fn domain(msg: core::fmt::Arguments<'_>) -> Error {
    Error::Domain(alloc::fmt::format(msg))
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::domain(format_args!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
