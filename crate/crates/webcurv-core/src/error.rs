//! Error type shared by the exact and numeric layers.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the kernel.
///
/// The variants mirror the failure modes of the public operations; the CLI
/// maps them onto process exit codes, so adding a variant means deciding its
/// exit class there as well.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Input violated a documented precondition (zero divisor, wrong shape,
    /// incompatible field contexts, ...).
    Invalid(String),
    /// Division by zero in the scalar field.
    DivisionByZero,
    /// A residue class that had to be invertible was a zero divisor.
    /// Carries a printable culprit (the offending gcd or modulus).
    ZeroDivisor(String),
    /// Total degree exceeded the configured cap during polynomial arithmetic.
    DegreeCap { cap: u64, attempted: u64 },
    /// Exact mode cannot represent the requested quantity (for example a
    /// critical value outside `K`); numeric mode may still apply.
    ExactUnsupported(String),
    /// The numeric engine could not certify a sign/zero decision after
    /// precision escalation.
    Indeterminate(String),
    /// Numeric iteration failed to converge or to cluster unambiguously.
    Numeric(String),
    /// Expression syntax error at a byte offset of the source string.
    Parse { offset: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::ZeroDivisor(m) => write!(f, "zero divisor: {m}"),
            Error::DegreeCap { cap, attempted } => {
                write!(f, "degree cap exceeded: {attempted} > {cap}")
            }
            Error::ExactUnsupported(m) => {
                write!(f, "exact mode unsupported, use numeric: {m}")
            }
            Error::Indeterminate(m) => write!(f, "indeterminate numeric result: {m}"),
            Error::Numeric(m) => write!(f, "numeric failure: {m}"),
            Error::Parse { offset, message } => {
                write!(f, "parse error at offset {offset}: {message}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

impl Error {
    pub fn invalid(m: impl Into<String>) -> Self {
        Error::Invalid(m.into())
    }
}
