use thiserror::Error;

use crate::canonical::CanonicalForm;
use crate::structure::AdmissibilityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid window [{lo}, {hi}]: {reason}")]
    InvalidWindow { lo: i64, hi: i64, reason: String },

    #[error("band violation: block ({target} <- {src}) is outside the tridiagonal band")]
    BandViolation { target: i64, src: i64 },

    #[error("non-finite entry in block ({target} <- {src})")]
    NonFinite { target: i64, src: i64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rank-2 off-diagonal block on bond ({bond}, {})", bond + 1)]
    RankViolation { bond: i64 },

    #[error("local frame not orthogonal at site {site} (overlap {overlap:e})")]
    OrthogonalityFailure { site: i64, overlap: f64 },

    #[error("degenerate local frame at site {site}")]
    DegenerateFrame { site: i64 },

    #[error("walk is not admissible\n{0}")]
    NotAdmissible(Box<AdmissibilityReport>),

    #[error("infeasible profile: {0}")]
    InfeasibleProfile(String),

    #[error("negative real coefficient at site {site}; generic canonical form attached")]
    NegativeRealPart {
        site: i64,
        generic: Box<CanonicalForm>,
    },

    #[error("not a symmetry candidate: {0}")]
    NotASymmetryCandidate(String),

    #[error("support overflow: support is {distance} sites from the boundary but {steps} steps were requested")]
    SupportOverflow { distance: i64, steps: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
