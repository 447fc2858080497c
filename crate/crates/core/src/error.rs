//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid gauge body: {0}")]
    InvalidShape(String),
    #[error("operation requires a full-dimensional gauge body, got a segment")]
    SegmentNotSupported,
    #[error("direction is not a regular boundary direction of the gauge body")]
    NonRegularDirection,
    #[error("point is not on the boundary of the reflected body (gauge = {gauge})")]
    NotOnBoundary { gauge: f64 },
    #[error("polynomial fit is ill-conditioned (node spread too small)")]
    IllConditionedFit,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid direction sectors: {0}")]
    InvalidSectors(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("cluster size law has zero mean")]
    ZeroMeanClusterSize,
    #[error("operation requires a cluster-type process spec")]
    NotAClusterProcess,
    #[error("operation requires point grains (radius identically zero)")]
    PointGrainsRequired,
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("t-grid must have at least {min} points")]
    GridTooCoarse { min: usize },
    #[error("t-grid maximum {tmax} exceeds torus bound {bound} (window/4)")]
    TorusBound { tmax: f64, bound: f64 },
    #[error("invalid estimator configuration: {0}")]
    ConfigInvalid(String),
    #[error("curves are not comparable: {0}")]
    CurveMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum OrderingError {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("argument {value} outside domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },
    #[error("law has zero mean")]
    ZeroMean,
}
