use thiserror::Error;

/// Error type shared across the crate.
///
/// Everything except [`Error::Io`] is a domain error (bad input, violated
/// precondition, out-of-range size); the distinction drives the CLI exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} exceeds the supported size cap ({1})")]
    SizeCap(String, String),

    #[error("{0} is not a quadratic residue modulo {1}")]
    NonResidue(u64, u64),

    #[error("factoring iteration budget exhausted on {0}")]
    FactorBudget(u128),

    #[error("generator multiset is not closed under inversion")]
    AsymmetricGenerators,

    #[error("empty generator set: smallest admissible {parameter} is {minimum}")]
    EmptyGenerators { parameter: String, minimum: u64 },

    #[error("trivial eigenvalue {0} is too small for a spectral ratio")]
    RatioUndefined(f64),

    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),

    #[error("invalid discriminant {0}: must be negative and 0 or 1 mod 4")]
    InvalidDiscriminant(i64),

    #[error("invalid quadratic form ({0}, {1}, {2})")]
    InvalidForm(i64, i64, i64),

    #[error("prime {0} divides the conductor of discriminant {1}")]
    NonInvertibleIdeal(u64, i64),

    #[error("curve y^2 = x^3 + {a}x + {b} over F_{p} is singular")]
    SingularCurve { p: u64, a: u64, b: u64 },

    #[error("trace {t} is divisible by the characteristic: not ordinary")]
    NotOrdinary { t: i64 },

    #[error("no modular polynomial bundled for level {0}")]
    UnsupportedModularLevel(u64),

    #[error("kernel point does not have exact order {0}")]
    BadKernelOrder(u64),

    #[error("kernel subgroup is not defined over the base field")]
    NotRational,

    #[error("a walk step's kernel meets the subgroup generated by the input point")]
    KernelCollision,

    #[error("dlog oracle covers no curve in the level")]
    EmptyOracle,

    #[error("retry cap {0} exhausted without landing on a covered curve")]
    RetryCapExhausted(u64),

    #[error("fixture parse error: {0}")]
    FixtureParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for everything except I/O failures.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Io(_))
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Error {
        Error::Domain(msg.into())
    }
}
