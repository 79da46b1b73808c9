use std::fmt;

use thiserror::Error;

/// Which part of the library raised an error. Rendered by the CLI so users
/// can tell a parse failure from an arithmetic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Module {
    Arith,
    Poly,
    Laurent,
    FunctionField,
    DivisorHeight,
    Specialized,
    Bottcher,
    Parse,
    Harness,
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Module::Arith => "exact-arith",
            Module::Poly => "polyfun",
            Module::Laurent => "laurent",
            Module::FunctionField => "ff-heights",
            Module::DivisorHeight => "div-heights",
            Module::Specialized => "specialized",
            Module::Bottcher => "bottcher",
            Module::Parse => "expr-parse",
            Module::Harness => "harness",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("valuation of zero")]
    ValuationOfZero,

    #[error("{0} is not prime")]
    NotPrime(String),

    #[error("factorization out of desk range: {0}")]
    FactorizationRange(String),

    #[error("pole at parameter: {point} vanishes at t = {t}")]
    PoleAtParameter { point: String, t: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("no rational branch: {0}")]
    NoRationalBranch(String),

    #[error("extension field required: closed point {0} has degree > 1")]
    ExtensionFieldRequired(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate fibre at t = {t}: {reason}")]
    DegenerateFibre { t: String, reason: String },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("t = {0} lies in the support of the divisor")]
    SupportPoint(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("no correction data for support point {0}")]
    MissingCorrection(String),
}

impl Error {
    pub fn module(&self) -> Module {
        match self {
            Error::ValuationOfZero | Error::NotPrime(_) | Error::FactorizationRange(_) => {
                Module::Arith
            }
            Error::PoleAtParameter { .. } | Error::DivisionByZero => Module::Poly,
            Error::PrecisionExhausted(_)
            | Error::NoRationalBranch(_)
            | Error::ExtensionFieldRequired(_) => Module::Laurent,
            Error::Resource(_) => Module::FunctionField,
            Error::SupportPoint(_) => Module::DivisorHeight,
            Error::DegenerateFibre { .. } => Module::Specialized,
            Error::MissingCorrection(_) => Module::Bottcher,
            Error::Syntax { .. } => Module::Parse,
            Error::InvalidArgument(_) | Error::Internal(_) => Module::Harness,
        }
    }

    /// True for errors caused by bad user input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::InvalidArgument(_) | Error::NotPrime(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
