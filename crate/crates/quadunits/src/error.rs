//! Error type shared by all modules.

use std::fmt;

/// Errors raised by construction and enumeration routines.
///
/// Search-bound exhaustion is usually reported through a
/// [`StabilityCertificate`](crate::unit_equation::StabilityCertificate) with
/// `stable = false` rather than an error; `BoundCapReached` appears as an
/// `Err` only where no partial result makes sense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The requested `d` is divisible by a square > 1.
    NotSquarefree(i64),
    /// The requested `d` is < 2, so `Q(sqrt(d))` is not real quadratic.
    NotRealQuadratic(i64),
    /// Two elements of different fields were combined.
    FieldMismatch { left: i64, right: i64 },
    /// An operation requiring a unit was applied to a non-unit.
    NotAUnit,
    /// Subset scan refused: too many terms for an exhaustive search.
    TooManyTerms(usize),
    /// Local solubility analysis requires `k >= 2`.
    KTooSmall(i64),
    /// An operation's precondition does not hold for the given input.
    PreconditionViolated(String),
    /// The exponent search cap was hit before the needed data stabilised.
    BoundCapReached,
    /// A residue search would exceed its stated budget.
    BudgetExceeded,
    /// Malformed bound configuration.
    InvalidBounds(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSquarefree(d) => write!(f, "d = {} is not squarefree", d),
            Error::NotRealQuadratic(d) => {
                write!(f, "d = {} does not define a real quadratic field (need d >= 2)", d)
            }
            Error::FieldMismatch { left, right } => {
                write!(f, "elements of Q(sqrt({})) and Q(sqrt({})) cannot be combined", left, right)
            }
            Error::NotAUnit => write!(f, "element is not a unit"),
            Error::TooManyTerms(n) => write!(f, "subset scan limited to 24 terms, got {}", n),
            Error::KTooSmall(k) => write!(f, "local analysis requires k >= 2, got {}", k),
            Error::PreconditionViolated(msg) => write!(f, "precondition violated: {}", msg),
            Error::BoundCapReached => write!(f, "exponent bound cap reached before stabilisation"),
            Error::BudgetExceeded => write!(f, "residue search budget exceeded"),
            Error::InvalidBounds(msg) => write!(f, "invalid bound configuration: {}", msg),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
