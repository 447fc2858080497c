//! The direction measure on the boundary of the reflected gauge body.
//!
//! For a full-dimensional gauge body `B` the measure assigns to a direction
//! set `C` the value `d * integral over B* of 1{radial projection of x onto
//! the boundary of B* lies in C} dx`; its total mass is `d * V_d(B*)`. Point
//! contact directions of grain-free germ processes are distributed
//! proportionally to it, which is also how sampling works here: uniform
//! points of `B*` projected radially to the boundary.

use super::{DirectionSectors, GaugeBody};
use crate::error::GeometryError;
use crate::rng::{stream_rng, MC_STREAM};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NuMethod {
    Closed,
    MonteCarlo,
}

/// Per-sector direction-measure values with standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct NuEstimate {
    pub per_sector: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub method: NuMethod,
}

impl NuEstimate {
    pub fn total(&self) -> f64 {
        self.per_sector.iter().sum()
    }

    pub fn total_se(&self) -> f64 {
        self.std_errors.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Sector fractions of the total mass.
    pub fn fractions(&self) -> Vec<f64> {
        let tot = self.total();
        self.per_sector.iter().map(|v| v / tot).collect()
    }
}

/// Direction-measure values per sector; closed form where exact (trivial
/// partition for any shape, angular sectors for balls), Monte Carlo
/// otherwise. Rejects segments.
pub fn nu_measure(
    gauge: &GaugeBody,
    sectors: &DirectionSectors,
    samples: usize,
    seed: u64,
) -> Result<NuEstimate, GeometryError> {
    if !gauge.is_full_dimensional() {
        return Err(GeometryError::SegmentNotSupported);
    }
    sectors.validate(gauge.dim())?;
    let total = gauge.dim() as f64 * gauge.volume();
    match sectors {
        DirectionSectors::Full => Ok(NuEstimate {
            per_sector: vec![total],
            std_errors: vec![0.0],
            method: NuMethod::Closed,
        }),
        DirectionSectors::Angular { .. } if matches!(gauge.shape(), super::Shape::Ball { .. }) => {
            let fr = sectors.isotropic_fractions().expect("angular");
            Ok(NuEstimate {
                per_sector: fr.iter().map(|f| f * total).collect(),
                std_errors: vec![0.0; fr.len()],
                method: NuMethod::Closed,
            })
        }
        _ => nu_measure_mc(gauge, sectors, samples, seed),
    }
}

/// Monte Carlo path of [`nu_measure`]: rejection sampling from the bounding
/// box of the reflected body. All sectors share one sample stream, so summing
/// a partition reproduces the one-sector total exactly.
pub fn nu_measure_mc(
    gauge: &GaugeBody,
    sectors: &DirectionSectors,
    samples: usize,
    seed: u64,
) -> Result<NuEstimate, GeometryError> {
    if !gauge.is_full_dimensional() {
        return Err(GeometryError::SegmentNotSupported);
    }
    sectors.validate(gauge.dim())?;
    let dim = gauge.dim();
    let bbox = gauge.bounding_box_reflected();
    let box_volume: f64 = bbox.iter().map(|[lo, hi]| hi - lo).product();
    let scale = dim as f64 * box_volume;

    let mut rng = stream_rng(seed, MC_STREAM);
    let mut counts = vec![0u64; sectors.count()];
    let mut point = vec![0.0; dim];
    for _ in 0..samples {
        for (k, range) in point.iter_mut().zip(&bbox) {
            *k = rng.random_range(range[0]..range[1]);
        }
        let g = gauge.gauge_reflected(&point);
        if g <= 1.0 && g > 0.0 {
            let dir: Vec<f64> = point.iter().map(|x| x / g).collect();
            counts[sectors.classify(&dir)] += 1;
        }
    }

    let n = samples as f64;
    let per_sector: Vec<f64> = counts.iter().map(|&c| scale * c as f64 / n).collect();
    let std_errors: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let f = c as f64 / n;
            scale * (f * (1.0 - f) / n).sqrt()
        })
        .collect();
    Ok(NuEstimate {
        per_sector,
        std_errors,
        method: NuMethod::MonteCarlo,
    })
}

/// Draw a direction on the boundary of `B*` distributed as the normalized
/// direction measure, returning it together with its sector index.
///
/// Balls use direct uniform sphere sampling; other shapes use rejection from
/// the bounding box followed by radial projection.
pub fn sample_direction<R: Rng>(
    gauge: &GaugeBody,
    sectors: &DirectionSectors,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> usize {
    let dim = gauge.dim();
    out.clear();
    match gauge.shape() {
        super::Shape::Ball { radius } => {
            loop {
                out.clear();
                let mut n2 = 0.0;
                for _ in 0..dim {
                    let g: f64 = rng.sample(StandardNormal);
                    n2 += g * g;
                    out.push(g);
                }
                if n2 > 1e-24 {
                    let s = radius / n2.sqrt();
                    for v in out.iter_mut() {
                        *v *= s;
                    }
                    break;
                }
            }
        }
        _ => {
            let bbox = gauge.bounding_box_reflected();
            loop {
                out.clear();
                for range in &bbox {
                    out.push(rng.random_range(range[0]..range[1]));
                }
                let g = gauge.gauge_reflected(out);
                if g <= 1.0 && g > 0.0 {
                    for v in out.iter_mut() {
                        *v /= g;
                    }
                    break;
                }
            }
        }
    }
    sectors.classify(out)
}
