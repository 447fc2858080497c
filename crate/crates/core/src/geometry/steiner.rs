//! Steiner / mixed-volume coefficients of dilated ball grains.
//!
//! `H_B(t) = E V_d(X_0 + tB*)` is a degree-`d` polynomial in the dilation
//! parameter. Coefficients are stored highest power first: `coeffs[i]`
//! multiplies `t^{d-i}`, so `coeffs[0] = V_d(B*)` (the pure dilation term)
//! and `coeffs[d] = E V_d(X_0)` (the undilated mean grain volume).

use super::GaugeBody;
use crate::error::GeometryError;
use crate::models::ScalarLaw;
use crate::rng::{stream_rng, MC_STREAM};
use crate::unit_ball_volume;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SteinerCoefficients {
    pub dim: usize,
    /// `coeffs[i]` multiplies `t^{d-i}`; length `d + 1`.
    pub coeffs: Vec<f64>,
}

impl SteinerCoefficients {
    /// Mean dilated grain volume `H_B(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c * t.powi((d - i) as i32);
        }
        acc
    }

    /// `H_B'(t)`, the total Boolean hazard before the intensity factor.
    pub fn derivative(&self, t: f64) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate().take(d) {
            let p = (d - i) as f64;
            acc += c * p * t.powi((d - i - 1) as i32);
        }
        acc
    }

    /// Mean relative support-measure totals: `coeffs[i] / b_{d-i}` for
    /// `i = 0..d-1`.
    pub fn mean_support_totals(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.coeffs[i] / unit_ball_volume(self.dim - i))
            .collect()
    }
}

/// Coefficients of `E V_d(X_0 + tB*)` for ball grains with radius law
/// `radius_law`.
///
/// Exact binomial expansion for ball gauges; Monte Carlo polynomial fit at
/// `d + 1` dilation nodes otherwise.
pub fn steiner_coefficients_ball_grain(
    gauge: &GaugeBody,
    radius_law: &ScalarLaw,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<SteinerCoefficients, GeometryError> {
    if let super::Shape::Ball { radius: rb } = gauge.shape() {
        // X_0 + tB* is a ball of radius R + t*rb:
        // H(t) = b_d E[(R + t rb)^d] = sum_i b_d C(d,i) E[R^i] (rb t)^{d-i}.
        let bd = unit_ball_volume(dim);
        let coeffs = (0..=dim)
            .map(|i| {
                bd * binom(dim, i) * radius_law.moment(i as u32) * rb.powi((dim - i) as i32)
            })
            .collect();
        return Ok(SteinerCoefficients { dim, coeffs });
    }
    steiner_coefficients_mc(gauge, radius_law, dim, samples, seed)
}

/// Monte Carlo path of [`steiner_coefficients_ball_grain`]: hit-or-miss
/// volume estimates at `d + 1` dilation nodes, shared random numbers across
/// nodes, Vandermonde solve for the polynomial coefficients.
pub fn steiner_coefficients_mc(
    gauge: &GaugeBody,
    radius_law: &ScalarLaw,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<SteinerCoefficients, GeometryError> {
    if gauge.dim() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: gauge.dim(),
            got: dim,
        });
    }
    let r_max = radius_law.upper_bound();
    let node_scale = r_max + 2.0 * gauge.max_norm_radius();
    if !(node_scale > 0.0) {
        return Err(GeometryError::IllConditionedFit);
    }
    let nodes: Vec<f64> = (0..=dim)
        .map(|j| node_scale * j as f64 / dim as f64)
        .collect();
    let t_max = nodes[dim];

    // Bounding box covering B(r_max) + t_max B* for all nodes.
    let bstar_box = gauge.bounding_box_reflected();
    let bbox: Vec<[f64; 2]> = bstar_box
        .iter()
        .map(|[lo, hi]| [lo * t_max - r_max, hi * t_max + r_max])
        .collect();
    let box_volume: f64 = bbox.iter().map(|[lo, hi]| hi - lo).product();

    let mut rng = stream_rng(seed, MC_STREAM);
    let origin = vec![0.0; dim];
    let mut point = vec![0.0; dim];
    let mut hits = vec![0u64; dim + 1];
    for _ in 0..samples {
        let r = radius_law.sample(&mut rng);
        for (k, range) in point.iter_mut().zip(&bbox) {
            *k = rng.random_range(range[0]..range[1]);
        }
        // point lies in B(0, r) + tB* iff d_B(point, B(0, r)) <= t.
        let d = super::distance_to_ball_unchecked(gauge, &point, &origin, r);
        for (j, &t) in nodes.iter().enumerate() {
            if d <= t {
                hits[j] += 1;
            }
        }
    }
    let volumes: Vec<f64> = hits
        .iter()
        .map(|&h| box_volume * h as f64 / samples as f64)
        .collect();

    // Solve sum_i c_i t_j^{d-i} = V_j.
    let n = dim + 1;
    let mut a = vec![vec![0.0; n]; n];
    for (j, &t) in nodes.iter().enumerate() {
        for i in 0..n {
            a[j][i] = t.powi((dim - i) as i32);
        }
    }
    let coeffs = solve_linear(a, volumes).ok_or(GeometryError::IllConditionedFit)?;
    Ok(SteinerCoefficients { dim, coeffs })
}

fn binom(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..k.min(n - k) {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 * scale.max(1.0) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}
