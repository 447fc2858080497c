//! Empty-space hazard functions of germ-grain models.
//!
//! The crate simulates stationary germ-grain models (Boolean, Poisson-cluster,
//! mixed Poisson) on a periodic window, estimates the directed gauge-relative
//! empty space function and its hazard rate from realizations, evaluates the
//! matching closed-form and semi-analytic hazard formulas, and checks the
//! stochastic-order relations that connect them.
//!
//! Module map:
//! - [`geometry`]: gauge bodies, gauge-relative distances, the direction
//!   measure on the reflected boundary, Steiner/mixed-volume coefficients.
//! - [`models`]: seeded samplers for germ processes and scenes, including the
//!   size-biased typical-cluster samplers used by the analytic formulas.
//! - [`estimator`]: empirical empty-space function / density / hazard with
//!   replication pooling and error bars.
//! - [`analytic`]: closed-form and semi-Monte-Carlo hazard evaluation and
//!   asymptotic limits; the ground truth the estimator is validated against.
//! - [`orderings`]: analytic stochastic-order checkers (length-biased pgf
//!   order, first-cumulant order, stochastic scaling).
//!
//! All Monte Carlo entry points take an explicit seed and are deterministic
//! given (inputs, seed), independent of thread count.

pub mod analytic;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod models;
pub mod orderings;
pub mod rng;

mod util;

pub use analytic::{AnalyticHazard, AsymptoticLimits, SemiMcConfig};
pub use error::{EstimatorError, GeometryError, ModelError, OrderingError};
pub use estimator::{EstimatorConfig, HazardCurve, HazardTable};
pub use geometry::{DirectionSectors, GaugeBody, SteinerCoefficients};
pub use models::{
    BallUnion, ClusterPointLaw, ClusterSizeLaw, GenericClusterKind, GermGrainScene, IntensityLaw,
    ProcessKind, ProcessSpec, ScalarLaw,
};
pub use orderings::{CheckMethod, CountingLaw, Ordered, OrderingVerdict, Witness};

/// Stable 64-bit fingerprint of a byte string (FNV-1a), used for run
/// manifests and curve metadata.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    util::fnv1a64(bytes)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // b_0 = 1, b_1 = 2, b_d = 2 pi / d * b_{d-2}
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}
