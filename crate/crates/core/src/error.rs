use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// The leading token of each message is a stable machine-readable code; the
/// CLI maps these onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty-set")]
    EmptySet,

    #[error("dimension-mismatch: expected d={expected}, found d={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid-dimension: d={0} (only 1 and 2 are supported)")]
    InvalidDimension(usize),

    #[error("invalid-measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid-input: {0}")]
    InvalidInput(String),

    #[error("too-large: {0}")]
    TooLarge(String),

    #[error("not-real-polynomial: a(-v) != conj(a(v)) at v={0}")]
    NotRealPolynomial(String),

    #[error("zero-mass")]
    ZeroMass,

    #[error("lp-degenerate: {0}")]
    LpDegenerate(String),

    #[error("lp-unbounded")]
    LpUnbounded,

    #[error("grid-too-coarse: certified bound {certified_lb:e} below allowance; suggested grid_size {suggested}")]
    GridTooCoarse { certified_lb: f64, suggested: usize },

    #[error("degenerate-homomorphism")]
    DegenerateHomomorphism,

    #[error("refuter-failed: no witness with positive mass at 0 on the enriched grid")]
    RefuterFailed,

    #[error("duality-violation: witness {witness} exceeds certificate {certificate} + slack {slack}")]
    DualityViolation {
        certificate: f64,
        witness: f64,
        slack: f64,
    },

    #[error("unaligned-window")]
    UnalignedWindow,

    #[error("out-of-horizon")]
    OutOfHorizon,

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Short code (the part of the message before any detail).
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySet => "empty-set",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidDimension(_) => "invalid-dimension",
            Error::InvalidMeasure(_) => "invalid-measure",
            Error::InvalidInput(_) => "invalid-input",
            Error::TooLarge(_) => "too-large",
            Error::NotRealPolynomial(_) => "not-real-polynomial",
            Error::ZeroMass => "zero-mass",
            Error::LpDegenerate(_) => "lp-degenerate",
            Error::LpUnbounded => "lp-unbounded",
            Error::GridTooCoarse { .. } => "grid-too-coarse",
            Error::DegenerateHomomorphism => "degenerate-homomorphism",
            Error::RefuterFailed => "refuter-failed",
            Error::DualityViolation { .. } => "duality-violation",
            Error::UnalignedWindow => "unaligned-window",
            Error::OutOfHorizon => "out-of-horizon",
            Error::Parse(_) => "parse",
        }
    }
}
