use thiserror::Error;

use crate::logic::LiteralType;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("symbol `{symbol}` has arity {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("{what} of size {size} exceeds the exhaustive bound {bound}")]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        bound: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Some literal-type class meets both a relation and its complement.
    #[error("`{symbol}` is not simply definable over this companion: {inside:?} and {outside:?} share a literal type")]
    NotSimplyDefinable {
        symbol: String,
        class: LiteralType,
        inside: Vec<usize>,
        outside: Vec<usize>,
    },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

impl Error {
    /// Stable machine-readable code used in CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain_error",
            Error::Signature(_) => "invalid_signature",
            Error::SignatureMismatch(_) => "signature_mismatch",
            Error::UnknownSymbol(_) => "unknown_symbol",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::UnboundVariable(_) => "unbound_variable",
            Error::UnsupportedSize { .. } => "unsupported_size",
            Error::Precondition(_) => "precondition_violated",
            Error::NotSimplyDefinable { .. } => "not_simply_definable",
            Error::Parse { .. } => "parse_error",
        }
    }
}
