use carnot_core::{ConstructError, GroupError, PolyError};

#[derive(Debug, thiserror::Error)]
pub enum AcfError {
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("no sample landed in the ball")]
    ZeroAcceptance,
    #[error("integrand is not G-homogeneous of degree {0}")]
    NotHomogeneous(u32),
    #[error("negative homogeneity degree")]
    NegativeDegree,
    #[error("bad decomposition: {0}")]
    BadDecomposition(String),
    #[error("rank-deficient fit: need at least 3 distinct radii")]
    RankDeficient,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Result<T, E = AcfError> = std::result::Result<T, E>;
