use thiserror::Error;

/// Errors raised by domain arithmetic, series operations, map algebra,
/// inversion, and the experiment harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("incompatible domains: {left} vs {right}")]
    DomainMismatch { left: String, right: String },

    #[error("not a unit: {0}")]
    NotAUnit(String),

    #[error("variable count mismatch: expected {expected}, found {found}")]
    VariableCountMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range for {count} variables")]
    VariableIndexOutOfRange { index: usize, count: usize },

    #[error("degree cap {cap} too small: {reason}")]
    InvalidDegreeCap { cap: u32, reason: String },

    #[error("term of total degree {degree} does not fit under degree cap {cap}")]
    TermBeyondCap { degree: u32, cap: u32 },

    #[error("composition requires vanishing constant terms (component {component})")]
    NonzeroConstantTerm { component: usize },

    #[error("map is not normalized: {0}; run normalize first")]
    NotNormalized(String),

    #[error("linear part not invertible over R: {0}")]
    LinearPartNotInvertible(String),

    #[error("matrix dimension {dim} exceeds the desk-scale determinant limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("cannot evaluate a truncated series over the rationals: terms beyond the degree cap are unknown")]
    NonPolynomialEvaluation,

    #[error("cannot extend the degree cap of a truncated series from {from} to {to}")]
    TruncatedExtension { from: u32, to: u32 },

    #[error("series is marked truncated but {0} requires a fully stored polynomial")]
    TruncatedInput(String),

    #[error("initial map is not an inverse modulo I: {0}")]
    NotInverseModIdeal(String),

    #[error("Jacobian determinant is not a Tate unit: {0}")]
    JacobianNotUnit(String),

    #[error("Jacobian determinant is not a constant unit: {0}")]
    JacobianNotConstantUnit(String),

    #[error("target precision {requested} exceeds the domain precision {available}")]
    PrecisionTarget { requested: u32, available: u32 },

    #[error("precision contract violated at step {step}: expected error valuation >= {expected}, observed {observed}")]
    PrecisionContract {
        step: usize,
        expected: u32,
        observed: u32,
    },

    #[error("enumeration requires {required} points, over the budget of {budget}")]
    EnumerationBudget { required: u128, budget: u64 },

    #[error("inverse has a noninteger coefficient at degree {degree}: {coefficient}")]
    NonIntegerCoefficient { degree: u32, coefficient: String },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("operation requires an adic domain, got {0}")]
    RequiresAdicDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
