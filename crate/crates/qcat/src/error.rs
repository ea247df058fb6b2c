use thiserror::Error;

#[derive(Debug, Error)]
pub enum QcatError {
    /// Input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// Input parsed but an entry required by the fusion rules is missing or malformed.
    #[error("schema error: {0}")]
    Schema(String),
    /// Numerical data violates an axiom that must hold on load (unitarity, fusion rules).
    #[error("data error: {0}")]
    Data(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("no phase solves the conjugacy relations for {0}")]
    Conjugacy(String),
    #[error("S-matrix is singular")]
    Degenerate,
    #[error("category is not modular")]
    NotModular,
    #[error("category is not rational")]
    NotRational,
    #[error("not a Frobenius algebra: {0}")]
    NotFrobenius(String),
    #[error("cannot be made standard: {0}")]
    NonStandardizable(String),
    #[error("not a projection: {0}")]
    NotProjection(String),
    #[error("normalization condition fails: {0}")]
    Normalization(String),
    #[error("Q-system is not simple (dim Hom0 = {0})")]
    NotSimple(usize),
    #[error("intermediate conditions fail: {0}")]
    Condition(String),
    #[error("objects live in different categories")]
    CategoryMismatch,
    #[error("multiplicity {0} is not an integer")]
    Rounding(f64),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("numeric inconsistency: {0}")]
    Consistency(String),
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("report schemas differ: {0}")]
    SchemaMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QcatError>;
