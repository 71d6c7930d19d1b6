use thiserror::Error;

/// Errors produced by the symbolic kernel and the model-file front end.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },

    #[error("`{0}` is not a unit: its body must be a single monomial with nonzero coefficient supported on invertible generators")]
    NotAUnit(String),

    #[error("negative exponent on non-invertible generator `{0}`")]
    NegativeExponent(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("operation requires a homogeneous derivation, got mixed parity: {0}")]
    MixedParity(String),

    #[error("form degree mismatch: expected degree {expected}, found {found}")]
    DegreeMismatch { expected: i64, found: i64 },

    #[error("point must assign a nonzero value to invertible generator `{0}`")]
    ZeroAtInvertible(String),

    #[error("morphism inverse failed round-trip on generator `{0}`")]
    BadInverse(String),

    #[error("functional is neither group-like nor primitive: {0}")]
    NotPrimitive(String),

    #[error("linear system is singular: no unit-body pivot in column {0}")]
    Singular(usize),

    #[error("bracket of primitives does not close on first-order part at generator `{0}`")]
    BracketNotClosed(String),

    #[error("invalid model data: {0}")]
    Model(String),

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
