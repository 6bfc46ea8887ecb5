use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the core.
///
/// Variants are split along the line the command line cares about:
/// malformed input and configuration versus mathematical domain violations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model input outside the model's domain (for example `[D] <= 0` for the Hill equation).
    Domain(String),
    /// Bad configuration: unknown family, arity mismatch, invalid option value.
    Config(String),
    /// A statistic that is undefined for the sample, such as skewness of a constant sample.
    Undefined(&'static str),
    /// Not enough observations for the requested operation.
    InsufficientData { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by inputs that violate a model's domain.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Undefined(what) => write!(f, "{what} is undefined for this sample"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} values, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {}
