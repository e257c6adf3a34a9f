use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("automaton is not deterministic")]
    NotDeterministic,
    #[error("invalid convolution: {0}")]
    InvalidConvolution(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("ill-formed formula: {0}")]
    IllFormed(String),
    #[error("infinite section: some assignment has infinitely many witnesses")]
    InfiniteSection,
    #[error("counting construction exceeded its state budget ({0} states)")]
    CountingBudget(usize),
    #[error("empty domain")]
    EmptyDomain,
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("language does not have polynomial growth")]
    NotPolynomial,
    #[error("internal consistency check failed: {0}")]
    Certificate(String),
    #[error("relation has infinite out-degree")]
    InfiniteOutdegree,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has a zero column")]
    ZeroColumn,
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cell mismatch: {0}")]
    CellMismatch(String),
    #[error("range of the affine map is not contained in the guard")]
    RangeNotInGuard,
    #[error("fiber is infinite")]
    InfiniteFiber,
    #[error("graph is not functional")]
    NotFunctional,
    #[error("no natural-coefficient form found: {0}")]
    NonNaturalDescriptor(String),
    #[error("relation `~` is not an equivalence: {0}")]
    NotEquivalence(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
