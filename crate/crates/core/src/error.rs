//! Error type shared by every module of the crate.

use std::fmt;

/// Errors surfaced by constructors and fallible operations.
///
/// Arithmetic between values built over *different* base fields or places is
/// a programming error and panics instead of returning a variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Division by zero in the rational function field.
    DivisionByZero,
    /// An operation received a zero argument it cannot handle.
    ZeroArgument(&'static str),
    /// Field construction failed (reducible conductor, order out of range, ...).
    InvalidField(String),
    /// Module construction failed (constant coefficient, rank, ...).
    InvalidModule(String),
    /// A place literal was not monic irreducible, or places disagree.
    InvalidPlace(String),
    /// The result has no significant digits left at the working precision.
    PrecisionExhausted,
    /// A point lies outside the certified convergence ball.
    OutsideBall { required: i64, actual: Option<i64> },
    /// No ball parameter up to the search cap certifies the truncated series.
    NoCertifiedBall { truncation: usize },
    /// The module has bad reduction at the requested place.
    BadReduction(String),
    /// The leading coordinate is torsion, so the ratio invariants are undefined.
    LambdaUndefined,
    /// A ratio invariant has absolute value > 1 and cannot be used.
    UncertifiedLambda,
    /// Every coefficient of the series is zero to the working precision.
    ZeroSeries,
    /// The requested modulus degree is not supported by the enumeration bound.
    ModulusExceedsEvidence { max_mod_deg: usize, degree_bound: usize },
    /// No multiple of the modulus lands in the convergence ball below the cap.
    NoAnalyticWitness,
    /// A claimed torsion generator has no annihilator up to the search bound.
    UnverifiedTorsionGenerator,
    /// Vector/variety dimensions disagree.
    DimensionMismatch { expected: usize, actual: usize },
    /// Catch-all for argument validation.
    InvalidArgument(String),
    /// An internal consistency check failed; this is a bug.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DivisionByZero => write!(f, "division by zero in K"),
            Error::ZeroArgument(what) => write!(f, "zero argument: {what}"),
            Error::InvalidField(msg) => write!(f, "invalid field: {msg}"),
            Error::InvalidModule(msg) => write!(f, "invalid module: {msg}"),
            Error::InvalidPlace(msg) => write!(f, "invalid place: {msg}"),
            Error::PrecisionExhausted => write!(f, "precision exhausted"),
            Error::OutsideBall { required, actual } => match actual {
                Some(v) => write!(
                    f,
                    "outside convergence ball: need valuation >= {required}, got {v}"
                ),
                None => write!(
                    f,
                    "outside convergence ball: need valuation >= {required}, got indeterminate"
                ),
            },
            Error::NoCertifiedBall { truncation } => {
                write!(f, "no certified ball at this truncation ({truncation})")
            }
            Error::BadReduction(msg) => write!(f, "bad reduction: {msg}"),
            Error::LambdaUndefined => write!(f, "lambda undefined: x_1 torsion"),
            Error::UncertifiedLambda => write!(f, "uncertified lambda magnitude"),
            Error::ZeroSeries => write!(f, "series indistinguishable from zero"),
            Error::ModulusExceedsEvidence {
                max_mod_deg,
                degree_bound,
            } => write!(
                f,
                "modulus exceeds evidence: max modulus degree {max_mod_deg} requires enumeration bound > {max_mod_deg}, got {degree_bound}"
            ),
            Error::NoAnalyticWitness => write!(f, "no analytic witness"),
            Error::UnverifiedTorsionGenerator => write!(f, "unverified torsion generator"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
