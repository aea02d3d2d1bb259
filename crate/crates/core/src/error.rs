use thiserror::Error;

/// Errors raised by the library. Every variant is a rejected input or a
/// violated internal invariant; nothing is silently repaired.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero is not allowed here")]
    Zero,
    #[error("d = {0} is not sixth-power free")]
    NotSixthPowerFree(i64),
    #[error("point is not on y^2 = x^3 + {d}")]
    OffCurve { d: i64 },
    #[error("triple ({x}, {y}, {z}) does not satisfy Y^2 Z = X^3 + {d} Z^3")]
    TripleOffCurve {
        d: i64,
        x: String,
        y: String,
        z: String,
    },
    #[error("triple is not primitive: gcd(X, Y, Z) = {0}")]
    NotPrimitive(String),
    #[error("{0} is outside the accepted domain")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that indicate a broken internal invariant rather
    /// than a bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
