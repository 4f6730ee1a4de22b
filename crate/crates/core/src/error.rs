use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is too small (the sphere needs at least 2 coordinates)")]
    DimensionTooSmall(usize),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("points are antipodal; the logarithm map is undefined")]
    Antipodal,

    #[error("tangent vectors are attached to different base points")]
    BaseMismatch,

    #[error("vector is not tangent to its base point (inner product {0:e})")]
    NotTangent(f64),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semi-definite (smallest eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("no shards were supplied")]
    EmptyShards,

    #[error("eigengap must be positive, got {0:e}")]
    NonPositiveGap(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("lattice coordinate out of range (|x / cell| = {0:e})")]
    LatticeOverflow(f64),

    #[error(
        "radius violated in round {round} ({stream}, node {node}): \
         distance {distance:e} exceeds input radius {radius:e}"
    )]
    RadiusViolation {
        round: usize,
        node: usize,
        stream: &'static str,
        distance: f64,
        radius: f64,
    },

    #[error("nodes disagree on the decoded value in round {round}")]
    Divergence { round: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
