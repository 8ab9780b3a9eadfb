use thiserror::Error;

/// Failure modes shared by every layer of the crate.
///
/// Variants fall into three groups, which the command line front end maps
/// onto distinct exit codes: malformed models ([`Error::Shape`],
/// [`Error::Model`]), violated mathematical hypotheses (most variants) and
/// internal disagreement between two routes to the same class
/// ([`Error::Consistency`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("class not in K0(J): {0}")]
    ClassNotInK0(String),

    #[error("operator is not Fredholm: {0}")]
    NotFredholm(String),

    #[error("no spectral gap at 1/2 (eigenvalue {eigenvalue:e} in block {block})")]
    NoSpectralGap { block: usize, eigenvalue: f64 },

    #[error("path leaves the selfadjoint J-Fredholm operators at t = {t} (quotient gap {gap:e})")]
    PathNotFredholm { t: f64, gap: f64 },

    #[error("cannot certify partition on [{start}, {end}] (quotient projection distance {distance})")]
    PartitionFailure { start: f64, end: f64, distance: f64 },

    #[error("numerical failure: {message} (achieved residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("sub-ideal too small: {0}")]
    SubIdealTooSmall(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    /// True for errors caused by a malformed input rather than by mathematics.
    pub fn is_schema(&self) -> bool {
        matches!(self, Error::Shape(_) | Error::Model(_))
    }

    pub fn is_consistency(&self) -> bool {
        matches!(self, Error::Consistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
