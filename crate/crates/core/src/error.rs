use thiserror::Error;

use crate::lattice::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {point} is not in the domain {domain}")]
    OutsideDomain { point: Point, domain: String },

    #[error("walk step from {from} to {to} is not a nearest-neighbour step")]
    NotAdjacent { from: Point, to: Point },

    #[error("walk endpoints do not match the bridging edge: {0}")]
    EndpointMismatch(String),

    #[error("edge set of {0} is infinite and no bounding box was provided")]
    UnboundedEdgeSet(String),

    #[error("invalid domain spec `{spec}`: {reason}")]
    InvalidDomainSpec { spec: String, reason: String },

    #[error("invalid point `{0}`")]
    InvalidPoint(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear system is singular or divergent: {0}")]
    Singular(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("sharp length is not decidable: {0}")]
    Undecidable(String),

    #[error("correlation length fit failed: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
