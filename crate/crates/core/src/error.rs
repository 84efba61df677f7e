use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: validation problems with the inputs
/// (bad bodies, grids, parameters) and numerical failures (rank-deficient
/// Gram matrices, singular point sets). The CLI maps them to exit codes 2
/// and 3 respectively; see [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("unsupported dimension {0}: bodies must have 1 <= d <= 3")]
    UnsupportedDimension(usize),

    #[error("body has no facet representation; exact lattice/volume operations need facets when d > 1")]
    MissingFacets,

    #[error("degenerate body: volume is zero")]
    DegenerateBody,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("need at least {needed} distinct points, grid has {available}")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("no nonsingular configuration exists on the grid")]
    AllSingular,

    #[error("degenerate Gram matrix (measure does not separate Poly(nP))")]
    DegenerateGram,

    #[error("no weight value available at the requested point")]
    MissingWeight,

    #[error("unknown case: {0}")]
    UnknownCase(String),

    #[error("grid functions are defined on different grids or masks")]
    MaskMismatch,

    #[error("asymptotic slopes differ ({0} vs {1}); functions come from different bodies")]
    SlopeMismatch(f64, f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateGram
                | Error::AllSingular
                | Error::NonFinite(_)
                | Error::DegenerateBody
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
