use thiserror::Error;

/// Errors raised anywhere in the library. Every variant maps to a stable,
/// machine-readable code via [`Error::code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus is reducible over GF(2)")]
    ReducibleModulus,
    #[error("modulus degree {got} does not match the requested degree {expected}")]
    ModulusDegree { expected: usize, got: usize },
    #[error("could not fully factor {what} within the configured budget")]
    FactorizationTimeout { what: String },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{sub} does not divide the field degree {degree}")]
    NotASubfieldDegree { sub: usize, degree: usize },
    #[error("gram matrix is singular: the vectors are not a basis")]
    SingularGram,
    #[error("vectors are not a basis over the subfield: {0}")]
    NotABasis(String),
    #[error("dimension {k} exceeds code length {n}")]
    DimensionExceedsLength { k: usize, n: usize },
    #[error("parity polynomial degree {degree} exceeds n-k-1 = {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("duplicate coordinate index {0}")]
    DuplicateIndex(usize),
    #[error("group {group}: {t} points requested but only {available} primitive elements exist")]
    InsufficientPrimitives { group: usize, t: usize, available: String },
    #[error("rate violation: k = {k} exceeds n - t = {max}")]
    RateViolation { k: usize, max: usize },
    #[error("prime {prime} is not congruent to 1 mod {s}")]
    BadPrime { prime: u64, s: usize },
    #[error("construction constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("exponent {e} violates the repair-subspace hypothesis for prime {prime}")]
    BadExponent { e: u64, prime: u64 },
    #[error("no repair subspace found: {0}")]
    SpanFailure(String),
    #[error("{d} helpers is fewer than k = {k}")]
    TooFewHelpers { d: usize, k: usize },
    #[error("repair locality {d} outside [{min}, {max}]")]
    LocalityOutOfRange { d: usize, min: usize, max: usize },
    #[error("codeword or cluster does not belong to this plan")]
    PlanMismatch,
    #[error("node {0} has already failed")]
    AlreadyFailed(usize),
    #[error("node {0} cannot fail while node {1} is down; only single failures are supported")]
    SecondFailureUnsupported(usize, usize),
    #[error("no failed node to repair")]
    NothingToRepair,
    #[error("node index {index} out of range for n = {n}")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("digest mismatch: {0}")]
    DigestMismatch(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::ReducibleModulus => "REDUCIBLE_MODULUS",
            Error::ModulusDegree { .. } => "MODULUS_DEGREE",
            Error::FactorizationTimeout { .. } => "FACTORIZATION_TIMEOUT",
            Error::ZeroInverse => "ZERO_INVERSE",
            Error::NotASubfieldDegree { .. } => "NOT_A_SUBFIELD_DEGREE",
            Error::SingularGram => "SINGULAR_GRAM",
            Error::NotABasis(_) => "NOT_A_BASIS",
            Error::DimensionExceedsLength { .. } => "DIMENSION_EXCEEDS_LENGTH",
            Error::DegreeTooHigh { .. } => "DEGREE_TOO_HIGH",
            Error::DuplicateIndex(_) => "DUPLICATE_INDEX",
            Error::InsufficientPrimitives { .. } => "INSUFFICIENT_PRIMITIVES",
            Error::RateViolation { .. } => "RATE_VIOLATION",
            Error::BadPrime { .. } => "BAD_PRIME",
            Error::ConstraintViolation(_) => "CONSTRAINT_VIOLATION",
            Error::BadExponent { .. } => "BAD_EXPONENT",
            Error::SpanFailure(_) => "SPAN_FAILURE",
            Error::TooFewHelpers { .. } => "TOO_FEW_HELPERS",
            Error::LocalityOutOfRange { .. } => "LOCALITY_OUT_OF_RANGE",
            Error::PlanMismatch => "PLAN_MISMATCH",
            Error::AlreadyFailed(_) => "ALREADY_FAILED",
            Error::SecondFailureUnsupported(..) => "SECOND_FAILURE_UNSUPPORTED",
            Error::NothingToRepair => "NOTHING_TO_REPAIR",
            Error::NodeOutOfRange { .. } => "NODE_OUT_OF_RANGE",
            Error::DigestMismatch(_) => "DIGEST_MISMATCH",
            Error::CorruptFile(_) => "CORRUPT_FILE",
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::Io(_) => "IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
