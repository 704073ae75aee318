use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-unit vector (norm deviates from 1 by {deviation:e})")]
    NonUnitVector { deviation: f64 },

    #[error("degenerate span (smallest Gram eigenvalue {smallest:e})")]
    DegenerateSpan { smallest: f64 },

    #[error("not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("not a contraction (eigenvalue {eigenvalue})")]
    NotContraction { eigenvalue: f64 },

    #[error("not PSD (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("not orthogonal (defect {defect:e})")]
    NotOrthogonal { defect: f64 },

    #[error("not a projection: {0}")]
    NotProjection(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector outside the plane (residual {residual:e})")]
    OutsidePlane { residual: f64 },

    #[error("angle out of range: {0}")]
    AngleOutOfRange(f64),

    #[error("target out of range: {0}")]
    TargetOutOfRange(f64),

    #[error("eps out of range: {0}")]
    EpsOutOfRange(f64),

    #[error("word too long for literal evaluation (length {length}, cap {cap})")]
    WordTooLong { length: String, cap: u64 },

    #[error("scaled exponent not allowed in literal evaluation")]
    ScaledExponent,

    #[error("exact mode required for exponents below 2^127")]
    ScaledTooSmall,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("non-symmetric power base (defect {defect:e})")]
    NonSymmetricPowerBase { defect: f64 },

    #[error("no projection bound to letter {0}")]
    MissingLetter(char),

    #[error("letter {0} outside the word's alphabet")]
    AlphabetViolation(char),

    #[error("lemma1 angle search failed at stage {stage} (residuals {residuals:?})")]
    Lemma1AngleSearchFailed { stage: usize, residuals: Vec<f64> },

    #[error("lemma2 angle search failed at index {index}")]
    Lemma2AngleSearchFailed { index: usize },

    #[error("corollary3 refinement failed after {attempts} attempts (residuals {residuals:?})")]
    Corollary3RefinementFailed { attempts: u32, residuals: Vec<f64> },

    #[error("construction failed its own check: {0}")]
    SelfCheck(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exponent {value} exceeds cap {cap}")]
    ExponentCapExceeded { value: String, cap: String },

    #[error("tolerance too tight for desk scale: {0}")]
    ToleranceTooTight(String),

    #[error("insufficient working precision: need {need} bits, have {have}")]
    InsufficientPrecision { need: usize, have: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
