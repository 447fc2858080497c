//! Closed-form and semi-analytic hazard evaluation.
//!
//! Every hazard formula the estimator is validated against lives here:
//! Boolean and mixed-Poisson hazards in closed form, Poisson-cluster /
//! Neyman-Scott / Gauss-Poisson and cluster germ-grain hazards via seeded
//! Monte Carlo over the typical cluster, plus the small- and large-dilation
//! limits and volume fractions.

mod cluster;

pub use cluster::{
    asymptotic_limits, cluster_germ_grain_hazard, gauss_poisson_hazard, k_tables_ordered,
    neyman_scott_hazard, poisson_cluster_hazard, AsymptoticLimits, KTables, SmallTKind,
};

use crate::error::EstimatorError;
use crate::estimator::HazardTable;
use crate::geometry::{
    nu_measure, steiner_coefficients_ball_grain, DirectionSectors, GaugeBody, Shape,
};
use crate::models::{IntensityLaw, ProcessKind, ProcessSpec, ScalarLaw};
use crate::orderings::{CheckMethod, Ordered, OrderingVerdict, Witness};
use crate::util::bessel_i0_scaled;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Sample budget for semi-analytic Monte Carlo evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiMcConfig {
    /// Outer samples (typical clusters, boundary pairs, directions).
    pub outer_samples: usize,
    /// Inner samples (containment probabilities, hit-or-miss volumes).
    pub inner_samples: usize,
    pub seed: u64,
}

impl Default for SemiMcConfig {
    fn default() -> Self {
        SemiMcConfig {
            outer_samples: 20_000,
            inner_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardMethod {
    Closed,
    SemiMc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSplit {
    Exact,
    /// Per-sector values split the exact totals by the direction-measure
    /// fractions; exact only for ball gauges with ball grains.
    Approximate,
}

/// Evaluated hazard curve: per-sector values, standard errors (zero on fully
/// closed paths), and the distribution function recovered from the total
/// hazard.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticHazard {
    pub t_grid: Vec<f64>,
    pub dim: usize,
    /// `labels[0] = "all"`, then one label per sector.
    pub labels: Vec<String>,
    pub hazard: Vec<Vec<f64>>,
    pub hazard_se: Vec<Vec<f64>>,
    pub cdf: Vec<Vec<f64>>,
    pub masked: Vec<Vec<bool>>,
    pub method: HazardMethod,
    pub direction_split: DirectionSplit,
    pub inner_samples: usize,
}

impl AnalyticHazard {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        t_grid: Vec<f64>,
        dim: usize,
        sectors: &DirectionSectors,
        hazard: Vec<Vec<f64>>,
        hazard_se: Vec<Vec<f64>>,
        method: HazardMethod,
        direction_split: DirectionSplit,
        inner_samples: usize,
    ) -> AnalyticHazard {
        let survival = survival_from_hazard(&t_grid, &hazard[0], dim);
        Self::assemble_with_survival(
            t_grid,
            dim,
            sectors,
            hazard,
            hazard_se,
            survival,
            method,
            direction_split,
            inner_samples,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble_with_survival(
        t_grid: Vec<f64>,
        dim: usize,
        sectors: &DirectionSectors,
        hazard: Vec<Vec<f64>>,
        hazard_se: Vec<Vec<f64>>,
        survival: Vec<f64>,
        method: HazardMethod,
        direction_split: DirectionSplit,
        inner_samples: usize,
    ) -> AnalyticHazard {
        let n_t = t_grid.len();
        let n_cols = hazard.len();
        // Per-sector distribution functions integrate the sector density
        // r_c(s) * S(s); the head below the first grid point uses the
        // power-law shape of the hazard near zero.
        let mut cdf = vec![vec![0.0; n_t]; n_cols];
        for col in 0..n_cols {
            let mut acc = head_integral(&t_grid, &hazard[col], dim) * survival_head(&survival);
            let density =
                |k: usize| hazard[col][k] * survival[k];
            cdf[col][0] = acc + 0.0;
            for k in 1..n_t {
                acc += 0.5 * (density(k) + density(k - 1)) * (t_grid[k] - t_grid[k - 1]);
                cdf[col][k] = acc;
            }
            cdf[col][0] = head_integral(&t_grid, &hazard[col], dim) * survival_head(&survival);
        }
        // Keep the total consistent with the survival actually used.
        for k in 0..n_t {
            cdf[0][k] = 1.0 - survival[k];
        }
        let masked = vec![vec![false; n_t]; n_cols];
        AnalyticHazard {
            t_grid,
            dim,
            labels: sectors.labels(),
            hazard,
            hazard_se,
            cdf,
            masked,
            method,
            direction_split,
            inner_samples,
        }
    }

    /// Survival of the total distribution, `1 - F(t)`.
    pub fn survival(&self, k: usize) -> f64 {
        1.0 - self.cdf[0][k]
    }

    /// Mask all cells where the total survival falls below `threshold`
    /// (comparisons are restricted to reliable survival ranges).
    pub fn mask_by_survival(&mut self, threshold: f64) {
        for k in 0..self.t_grid.len() {
            if self.survival(k) < threshold {
                for col in self.masked.iter_mut() {
                    col[k] = true;
                }
            }
        }
    }

    /// Dilation-scaled total hazard `t^{1-d} r(t)`.
    pub fn scaled_total(&self, k: usize) -> f64 {
        self.t_grid[k].powi(1 - self.dim as i32) * self.hazard[0][k]
    }

    pub fn table(&self) -> HazardTable<'_> {
        HazardTable {
            t_grid: &self.t_grid,
            labels: &self.labels,
            hazard: &self.hazard,
            hazard_se: &self.hazard_se,
            masked: &self.masked,
        }
    }

    /// Same CSV schema as the empirical curves plus a trailing method tag.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let method = match self.method {
            HazardMethod::Closed => "closed",
            HazardMethod::SemiMc => "semi_mc",
        };
        writeln!(w, "t,sector_id,F,F_se,f,r,r_se,masked,method")?;
        for k in 0..self.t_grid.len() {
            for col in 0..self.labels.len() {
                let density = self.hazard[col][k] * self.survival(k);
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    crate::estimator::fmt(self.t_grid[k]),
                    self.labels[col],
                    crate::estimator::fmt(self.cdf[col][k]),
                    crate::estimator::fmt(0.0),
                    crate::estimator::fmt(density),
                    crate::estimator::fmt(self.hazard[col][k]),
                    crate::estimator::fmt(self.hazard_se[col][k]),
                    self.masked[col][k] as u8,
                    method
                )?;
            }
        }
        Ok(())
    }
}

fn survival_head(survival: &[f64]) -> f64 {
    // Density head factor: survival is essentially 1 below the first node.
    let _ = survival;
    1.0
}

/// `integral_0^{t_0} r(s) ds` assuming `r(s) ~ C s^{d-1}` near zero.
fn head_integral(t_grid: &[f64], hazard: &[f64], dim: usize) -> f64 {
    hazard[0] * t_grid[0] / dim as f64
}

/// Survival from the total hazard: `S(t) = exp(-integral r)` via trapezoids
/// plus the power-law head.
pub(crate) fn survival_from_hazard(t_grid: &[f64], total_hazard: &[f64], dim: usize) -> Vec<f64> {
    let mut acc = head_integral(t_grid, total_hazard, dim);
    let mut out = Vec::with_capacity(t_grid.len());
    out.push((-acc).exp());
    for k in 1..t_grid.len() {
        acc += 0.5 * (total_hazard[k] + total_hazard[k - 1]) * (t_grid[k] - t_grid[k - 1]);
        out.push((-acc).exp());
    }
    out
}

/// `P(|Y - c| <= t)` for a centered isotropic Gaussian in the plane with
/// per-axis deviation `sigma` and `|c| = nu`: the Rice distribution function,
/// integrated by composite Simpson with a scaled Bessel kernel.
pub fn gaussian_ball_prob(nu: f64, sigma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let band = 10.0 * sigma;
    let lo = (nu - band).max(0.0);
    let hi = t.min(nu + band);
    if hi <= lo {
        // The ball either misses the bulk entirely or swallows it.
        return if t > nu { 1.0 } else { 0.0 };
    }
    let pdf = |rho: f64| -> f64 {
        let z = rho * nu / (sigma * sigma);
        (rho / (sigma * sigma))
            * (-(rho - nu) * (rho - nu) / (2.0 * sigma * sigma)).exp()
            * bessel_i0_scaled(z)
    };
    let n = 256usize;
    let h = (hi - lo) / n as f64;
    let mut acc = pdf(lo) + pdf(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * pdf(lo + i as f64 * h);
    }
    (acc * h / 3.0).clamp(0.0, 1.0)
}

/// Smallest dilation `t` at which `point` enters `tu + tB`; `+inf` if never.
/// `u` lies on the boundary of the reflected body.
pub(crate) fn entry_threshold_point(gauge: &GaugeBody, point: &[f64], u: &[f64]) -> f64 {
    if point.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    if let Shape::Ball { .. } = gauge.shape() {
        // |p - tu| <= t|u| reduces to t >= |p|^2 / (2 p.u).
        let pp: f64 = point.iter().map(|v| v * v).sum();
        let pu: f64 = point.iter().zip(u).map(|(a, b)| a * b).sum();
        return if pu > 0.0 { pp / (2.0 * pu) } else { f64::INFINITY };
    }
    let feasible = |t: f64| -> bool {
        let shifted: Vec<f64> = point.iter().zip(u).map(|(p, ui)| p - t * ui).collect();
        gauge.gauge(&shifted) <= t
    };
    bisect_threshold(point.iter().map(|v| v.abs()).fold(0.0, f64::max), feasible)
}

/// Smallest dilation `t` at which `x + tu + tB` hits `Ball(center, radius)`;
/// `+inf` if never.
pub(crate) fn entry_threshold_ball(
    gauge: &GaugeBody,
    x: &[f64],
    u: &[f64],
    center: &[f64],
    radius: f64,
) -> f64 {
    if let Shape::Ball { radius: rb } = gauge.shape() {
        let q: Vec<f64> = center.iter().zip(x).map(|(c, a)| c - a).collect();
        let qq: f64 = q.iter().map(|v| v * v).sum();
        if qq <= radius * radius {
            return 0.0;
        }
        let denom = 2.0 * (q.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() + radius * rb);
        return if denom > 0.0 {
            (qq - radius * radius) / denom
        } else {
            f64::INFINITY
        };
    }
    let feasible = |t: f64| -> bool {
        let base: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + t * b).collect();
        gauge.dist_to_scaled(t, &base, center) <= radius
    };
    let scale = center
        .iter()
        .zip(x)
        .map(|(c, a)| (c - a).abs())
        .fold(1.0, f64::max);
    bisect_threshold(scale, feasible)
}

fn bisect_threshold(scale: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    if feasible(0.0) {
        return 0.0;
    }
    let mut hi = scale.max(1.0);
    let mut found = false;
    for _ in 0..80 {
        if feasible(hi) {
            found = true;
            break;
        }
        hi *= 2.0;
    }
    if !found {
        return f64::INFINITY;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Boolean-model hazard: the dilation derivative of the mean Steiner
/// polynomial times the intensity, split over sectors by direction-measure
/// fractions.
pub fn boolean_hazard(
    lambda: f64,
    radius_law: &ScalarLaw,
    gauge: &GaugeBody,
    dim: usize,
    t_grid: &[f64],
    sectors: &DirectionSectors,
    mc: &SemiMcConfig,
) -> Result<AnalyticHazard, EstimatorError> {
    if !(lambda > 0.0) {
        return Err(EstimatorError::ConfigInvalid(format!(
            "intensity must be positive, got {lambda}"
        )));
    }
    let steiner =
        steiner_coefficients_ball_grain(gauge, radius_law, dim, mc.inner_samples, mc.seed)?;
    let nu = nu_measure(gauge, sectors, mc.inner_samples, mc.seed ^ 0x9e37)?;
    let fractions = nu.fractions();
    let is_ball = matches!(gauge.shape(), Shape::Ball { .. });
    let closed = is_ball && nu.std_errors.iter().all(|&s| s == 0.0);
    let split = if is_ball || sectors.count() == 1 {
        DirectionSplit::Exact
    } else {
        DirectionSplit::Approximate
    };

    let n_t = t_grid.len();
    let n_cols = sectors.count() + 1;
    let mut hazard = vec![vec![0.0; n_t]; n_cols];
    let mut hazard_se = vec![vec![0.0; n_t]; n_cols];
    for k in 0..n_t {
        let total = lambda * steiner.derivative(t_grid[k]);
        hazard[0][k] = total;
        for c in 0..sectors.count() {
            hazard[1 + c][k] = total * fractions[c];
            hazard_se[1 + c][k] = total * nu.std_errors[c] / nu.total();
        }
    }
    // Exact survival: 1 - F = exp(-lambda H(t)).
    let survival: Vec<f64> = t_grid
        .iter()
        .map(|&t| (-lambda * steiner.eval(t)).exp())
        .collect();
    Ok(AnalyticHazard::assemble_with_survival(
        t_grid.to_vec(),
        dim,
        sectors,
        hazard,
        hazard_se,
        survival,
        if closed {
            HazardMethod::Closed
        } else {
            HazardMethod::SemiMc
        },
        split,
        mc.inner_samples,
    ))
}

/// Mixed-Poisson germ-grain hazard: the Boolean shape with the intensity
/// replaced by the Laplace-ratio of the mixing law at the dilated mean grain
/// volume.
pub fn mixed_poisson_hazard(
    mixing: &IntensityLaw,
    radius_law: &ScalarLaw,
    gauge: &GaugeBody,
    dim: usize,
    t_grid: &[f64],
    sectors: &DirectionSectors,
    mc: &SemiMcConfig,
) -> Result<AnalyticHazard, EstimatorError> {
    mixing.validate()?;
    let steiner =
        steiner_coefficients_ball_grain(gauge, radius_law, dim, mc.inner_samples, mc.seed)?;
    let nu = nu_measure(gauge, sectors, mc.inner_samples, mc.seed ^ 0x9e37)?;
    let fractions = nu.fractions();
    let is_ball = matches!(gauge.shape(), Shape::Ball { .. });
    let split = if is_ball || sectors.count() == 1 {
        DirectionSplit::Exact
    } else {
        DirectionSplit::Approximate
    };

    let n_t = t_grid.len();
    let n_cols = sectors.count() + 1;
    let mut hazard = vec![vec![0.0; n_t]; n_cols];
    let mut hazard_se = vec![vec![0.0; n_t]; n_cols];
    for k in 0..n_t {
        let h = steiner.eval(t_grid[k]);
        let total = mixing.laplace_ratio(h) * steiner.derivative(t_grid[k]);
        hazard[0][k] = total;
        for c in 0..sectors.count() {
            hazard[1 + c][k] = total * fractions[c];
            hazard_se[1 + c][k] = total * nu.std_errors[c] / nu.total();
        }
    }
    // Exact survival: 1 - F = E[exp(-Lambda H(t))].
    let survival: Vec<f64> = t_grid
        .iter()
        .map(|&t| mixing.laplace(steiner.eval(t)))
        .collect();
    Ok(AnalyticHazard::assemble_with_survival(
        t_grid.to_vec(),
        dim,
        sectors,
        hazard,
        hazard_se,
        survival,
        if is_ball {
            HazardMethod::Closed
        } else {
            HazardMethod::SemiMc
        },
        split,
        mc.inner_samples,
    ))
}

/// Volume fraction of the model, `P(0 in Z)`, with its standard error
/// (zero on closed paths).
pub fn volume_fraction(spec: &ProcessSpec, mc: &SemiMcConfig) -> Result<(f64, f64), EstimatorError> {
    spec.validate()?;
    let dim = spec.dimension;
    let bd = crate::unit_ball_volume(dim);
    let mean_grain_volume = bd * spec.grain_radius.moment(dim as u32);
    match &spec.process {
        ProcessKind::Poisson { lambda } => {
            Ok((1.0 - (-lambda * mean_grain_volume).exp(), 0.0))
        }
        ProcessKind::MixedPoisson { mixing } => {
            Ok((1.0 - mixing.laplace(mean_grain_volume), 0.0))
        }
        ProcessKind::NeymanScott { lambda_parent, .. }
        | ProcessKind::GaussPoisson { lambda_parent, .. }
        | ProcessKind::GenericCluster { lambda_parent, .. } => {
            // The model is a Boolean model with compound grains: the whole
            // cluster with its ball grains. Estimate the mean union volume by
            // hit-or-miss within a per-cluster bounding box.
            let mut rng = crate::rng::stream_rng(mc.seed, crate::rng::MC_STREAM);
            let outer = mc.outer_samples.max(2);
            let inner = (mc.inner_samples / 64).max(128);
            let mut volumes = Vec::with_capacity(outer);
            let mut offsets: Vec<f64> = Vec::new();
            let mut point = vec![0.0; dim];
            for _ in 0..outer {
                offsets.clear();
                crate::models::append_cluster_offsets(&spec.process, dim, &mut rng, &mut offsets);
                let n_pts = offsets.len() / dim;
                if n_pts == 0 {
                    volumes.push(0.0);
                    continue;
                }
                let radii: Vec<f64> = (0..n_pts)
                    .map(|_| spec.grain_radius.sample(&mut rng))
                    .collect();
                let mut lo = vec![f64::INFINITY; dim];
                let mut hi = vec![f64::NEG_INFINITY; dim];
                for (j, p) in offsets.chunks_exact(dim).enumerate() {
                    for a in 0..dim {
                        lo[a] = lo[a].min(p[a] - radii[j]);
                        hi[a] = hi[a].max(p[a] + radii[j]);
                    }
                }
                let box_volume: f64 = (0..dim).map(|a| hi[a] - lo[a]).product();
                if box_volume <= 0.0 {
                    volumes.push(0.0);
                    continue;
                }
                let mut hits = 0u32;
                for _ in 0..inner {
                    for a in 0..dim {
                        point[a] = rng.random_range(lo[a]..hi[a]);
                    }
                    let inside = offsets.chunks_exact(dim).zip(&radii).any(|(p, &r)| {
                        let d2: f64 =
                            p.iter().zip(&point).map(|(v, q)| (v - q).powi(2)).sum();
                        d2 <= r * r
                    });
                    if inside {
                        hits += 1;
                    }
                }
                volumes.push(box_volume * hits as f64 / inner as f64);
            }
            let (mean_v, se_v) = crate::util::mean_se(&volumes);
            let se_v = se_v.unwrap_or(0.0);
            let vf = 1.0 - (-lambda_parent * mean_v).exp();
            let se = (-lambda_parent * mean_v).exp() * lambda_parent * se_v;
            Ok((vf, se))
        }
    }
}

/// Evaluate the hazard of any supported process spec with the appropriate
/// formula: Boolean for Poisson germs, the Laplace-ratio form for mixed
/// Poisson, the generating-function form for point-grain Neyman-Scott, the
/// cluster-sum form for other point-grain clusters, and the support-measure
/// form for cluster germ-grain models.
pub fn analytic_hazard_for(
    spec: &ProcessSpec,
    gauge: &GaugeBody,
    t_grid: &[f64],
    sectors: &DirectionSectors,
    mc: &SemiMcConfig,
) -> Result<AnalyticHazard, EstimatorError> {
    spec.validate()?;
    match &spec.process {
        ProcessKind::Poisson { lambda } => boolean_hazard(
            *lambda,
            &spec.grain_radius,
            gauge,
            spec.dimension,
            t_grid,
            sectors,
            mc,
        ),
        ProcessKind::MixedPoisson { mixing } => mixed_poisson_hazard(
            mixing,
            &spec.grain_radius,
            gauge,
            spec.dimension,
            t_grid,
            sectors,
            mc,
        ),
        ProcessKind::NeymanScott {
            lambda_parent,
            cluster_size,
            cluster_points,
        } if spec.has_point_grains() => neyman_scott_hazard(
            *lambda_parent,
            cluster_size,
            cluster_points,
            gauge,
            spec.dimension,
            t_grid,
            sectors,
            mc,
        ),
        ProcessKind::GaussPoisson {
            lambda_parent,
            p,
            secondary,
        } if spec.has_point_grains() => gauss_poisson_hazard(
            *lambda_parent,
            *p,
            secondary,
            gauge,
            spec.dimension,
            t_grid,
            sectors,
            mc,
        ),
        ProcessKind::GenericCluster { .. } if spec.has_point_grains() => {
            poisson_cluster_hazard(spec, gauge, t_grid, sectors, mc)
        }
        _ => cluster_germ_grain_hazard(spec, gauge, t_grid, sectors, mc).map(|(h, _)| h),
    }
}

/// Sufficient moment condition for hazard dominance between Boolean models
/// with scaled grains: `E[R^i] >= E[Rt^i]` for `i = 1..d-1`.
///
/// The verdict is `Yes` when the sufficient condition holds and
/// `Undetermined` otherwise; the condition failing does not witness a
/// violation of the order itself.
pub fn boolean_grain_scaling_order(
    scale: &ScalarLaw,
    scale_tilde: &ScalarLaw,
    dim: usize,
) -> OrderingVerdict {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for i in 1..dim as u32 {
        let a = scale.moment(i);
        let b = scale_tilde.moment(i);
        let margin = a - b;
        if margin < worst {
            worst = margin;
            witness = Some(Witness {
                location: i as f64,
                sector: None,
                value_a: a,
                value_b: b,
            });
        }
    }
    if dim <= 1 {
        worst = 0.0;
    }
    if worst >= 0.0 {
        OrderingVerdict {
            ordered: Ordered::Yes,
            worst_margin: worst,
            witness: None,
            method: CheckMethod::ClosedForm,
        }
    } else {
        OrderingVerdict {
            ordered: Ordered::Undetermined,
            worst_margin: worst,
            witness,
            method: CheckMethod::ClosedForm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn gaussian_ball_prob_matches_reference_values() {
        // Reference values from an independent noncentral chi-square
        // evaluation of P(|Y - c| <= t).
        let cases = [
            (1.0, 0.5, 1.0, 0.396499039388),
            (10.0, 0.5, 10.0, 0.490023321859),
            (0.3, 0.5, 0.2, 0.064675924248),
            (2.0, 1.0, 2.5, 0.605896075472),
            (0.0, 0.5, 0.5, 0.393469340287),
            (3.0, 0.7, 0.9, 0.000667980573),
            (0.05, 0.5, 4.0, 1.000000000000),
        ];
        for (nu, sigma, t, expected) in cases {
            let got = gaussian_ball_prob(nu, sigma, t);
            assert!(
                (got - expected).abs() < 2e-5,
                "P(nu={nu}, sigma={sigma}, t={t}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn entry_threshold_point_ball_closed_form() {
        let ball = GaugeBody::unit_ball(2);
        // Point (1, 0), direction e1: enters B(t e1, t) at t = 0.5.
        let t = entry_threshold_point(&ball, &[1.0, 0.0], &[1.0, 0.0]);
        assert!((t - 0.5).abs() < 1e-12);
        // Opposite side: never.
        let t = entry_threshold_point(&ball, &[-1.0, 0.0], &[1.0, 0.0]);
        assert_eq!(t, f64::INFINITY);
        // Matches the generic bisection on an equivalent box gauge.
        let bx = GaugeBody::boxed(vec![1.0, 1.0]).unwrap();
        let t = entry_threshold_point(&bx, &[2.0, 0.3], &[1.0, 0.0]);
        // Feasibility flips at the returned threshold.
        let test = |tt: f64| {
            let shifted = [2.0 - tt, 0.3];
            bx.gauge(&shifted) <= tt
        };
        assert!(!test(t * (1.0 - 1e-6)) && test(t * (1.0 + 1e-6)));
    }

    #[test]
    fn entry_threshold_ball_consistency() {
        let ball = GaugeBody::unit_ball(2);
        let t = entry_threshold_ball(&ball, &[0.0, 0.0], &[1.0, 0.0], &[3.0, 0.0], 0.5);
        // B(t e1, t) touches Ball((3,0), 0.5) when 2t + 0.5 = 3 => t = 1.25.
        // From the quadratic form: (9 - 0.25) / (2 (3 + 0.5)) = 1.25.
        assert!((t - 1.25).abs() < 1e-12);
        // Inside from the start.
        let t = entry_threshold_ball(&ball, &[0.0, 0.0], &[1.0, 0.0], &[0.1, 0.0], 0.5);
        assert_eq!(t, 0.0);
    }

    #[test]
    fn boolean_hazard_disk_closed_form() {
        // d = 2, unit-ball gauge, radius 0.5, lambda = 1: r(t) = 2 pi (0.5 + t).
        let mc = SemiMcConfig::default();
        let h = boolean_hazard(
            1.0,
            &ScalarLaw::Deterministic(0.5),
            &GaugeBody::unit_ball(2),
            2,
            &grid(0.1, 1.5, 15),
            &DirectionSectors::Full,
            &mc,
        )
        .unwrap();
        assert_eq!(h.method, HazardMethod::Closed);
        for (k, &t) in h.t_grid.iter().enumerate() {
            assert!((h.hazard[0][k] - 2.0 * PI * (0.5 + t)).abs() < 1e-10);
        }
        let k = h.t_grid.iter().position(|&t| (t - 0.5).abs() < 1e-9).unwrap();
        assert!((h.hazard[0][k] - 2.0 * PI).abs() < 1e-10);
        // Exact survival: 1 - exp(-pi (0.5 + t)^2).
        for (k, &t) in h.t_grid.iter().enumerate() {
            let expected = 1.0 - (-PI * (0.5 + t) * (0.5 + t)).exp();
            assert!((h.cdf[0][k] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn boolean_point_grains_matches_direction_measure_form() {
        // r(t) = lambda t^{d-1} d V_d(B*) for point grains.
        let mc = SemiMcConfig::default();
        for dim in [1usize, 2, 3] {
            let h = boolean_hazard(
                0.7,
                &ScalarLaw::zero(),
                &GaugeBody::unit_ball(dim),
                dim,
                &grid(0.2, 1.0, 5),
                &DirectionSectors::Full,
                &mc,
            )
            .unwrap();
            let nu_total = dim as f64 * crate::unit_ball_volume(dim);
            for (k, &t) in h.t_grid.iter().enumerate() {
                let expected = 0.7 * t.powi(dim as i32 - 1) * nu_total;
                assert!(
                    (h.hazard[0][k] - expected).abs() < 1e-10,
                    "d={dim} t={t}"
                );
                // Scaled hazard is constant: small-t and large-t slopes agree.
                assert!((h.scaled_total(k) - 0.7 * nu_total).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn boolean_sector_split_is_fraction_of_total() {
        let mc = SemiMcConfig::default();
        let h = boolean_hazard(
            1.0,
            &ScalarLaw::Deterministic(0.3),
            &GaugeBody::unit_ball(2),
            2,
            &grid(0.1, 1.0, 7),
            &DirectionSectors::quadrants(4),
            &mc,
        )
        .unwrap();
        assert_eq!(h.direction_split, DirectionSplit::Exact);
        for k in 0..h.t_grid.len() {
            let sum: f64 = (1..=4).map(|c| h.hazard[c][k]).sum();
            assert!((sum - h.hazard[0][k]).abs() < 1e-10);
            assert!((h.hazard[1][k] - 0.25 * h.hazard[0][k]).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_poisson_degenerate_equals_boolean() {
        let mc = SemiMcConfig::default();
        let t_grid = grid(0.1, 1.2, 12);
        let radius = ScalarLaw::Deterministic(0.4);
        let gauge = GaugeBody::unit_ball(2);
        let boolean = boolean_hazard(1.3, &radius, &gauge, 2, &t_grid, &DirectionSectors::Full, &mc)
            .unwrap();
        let mixed = mixed_poisson_hazard(
            &IntensityLaw::Degenerate { value: 1.3 },
            &radius,
            &gauge,
            2,
            &t_grid,
            &DirectionSectors::Full,
            &mc,
        )
        .unwrap();
        for k in 0..t_grid.len() {
            assert!((boolean.hazard[0][k] - mixed.hazard[0][k]).abs() < 1e-12);
            assert!((boolean.cdf[0][k] - mixed.cdf[0][k]).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_poisson_gamma_ratio() {
        // Gamma(alpha, beta): hazard ratio term is alpha / (beta + H(t)).
        let mc = SemiMcConfig::default();
        let t_grid = grid(0.1, 1.0, 10);
        let gauge = GaugeBody::unit_ball(2);
        let radius = ScalarLaw::Deterministic(0.5);
        let h = mixed_poisson_hazard(
            &IntensityLaw::Gamma { shape: 2.0, rate: 2.0 },
            &radius,
            &gauge,
            2,
            &t_grid,
            &DirectionSectors::Full,
            &mc,
        )
        .unwrap();
        for (k, &t) in t_grid.iter().enumerate() {
            let hb = PI * (0.5 + t) * (0.5 + t);
            let expected = 2.0 / (2.0 + hb) * 2.0 * PI * (0.5 + t);
            assert!((h.hazard[0][k] - expected).abs() < 1e-10);
        }
        // The ratio term is nonincreasing in t.
        let mut prev = f64::INFINITY;
        for (k, &t) in t_grid.iter().enumerate() {
            let ratio = h.hazard[0][k] / (2.0 * PI * (0.5 + t));
            assert!(ratio <= prev + 1e-12);
            prev = ratio;
        }
    }

    #[test]
    fn two_point_mixing_ratio_decreases_from_mean() {
        let law = IntensityLaw::TwoPoint { lo: 1.0, hi: 3.0, q: 0.5 };
        assert!((law.laplace_ratio(0.0) - 2.0).abs() < 1e-12);
        assert!(law.laplace_ratio(1.0) < 2.0);
    }

    #[test]
    fn volume_fraction_boolean_and_mixed() {
        let mc = SemiMcConfig::default();
        let spec = ProcessSpec::poisson(1.0, ScalarLaw::Deterministic(0.5), 20.0, 2);
        let (vf, se) = volume_fraction(&spec, &mc).unwrap();
        assert_eq!(se, 0.0);
        assert!((vf - (1.0 - (-PI / 4.0).exp())).abs() < 1e-12);
        assert!((vf - 0.54406).abs() < 1e-4);
        // Jensen: mixed Poisson volume fraction is below the Boolean one at
        // equal mean intensity.
        let mixed = ProcessSpec {
            process: ProcessKind::MixedPoisson {
                mixing: IntensityLaw::Gamma { shape: 2.0, rate: 2.0 },
            },
            grain_radius: ScalarLaw::Deterministic(0.5),
            window: 20.0,
            dimension: 2,
        };
        let (vf_mixed, _) = volume_fraction(&mixed, &mc).unwrap();
        assert!(vf_mixed < vf);
    }

    #[test]
    fn grain_scaling_order_examples() {
        let v = boolean_grain_scaling_order(
            &ScalarLaw::Deterministic(1.0),
            &ScalarLaw::Deterministic(0.5),
            2,
        );
        assert_eq!(v.ordered, Ordered::Yes);
        // Equal means at the boundary.
        let v = boolean_grain_scaling_order(
            &ScalarLaw::Uniform { lo: 0.0, hi: 2.0 },
            &ScalarLaw::Deterministic(1.0),
            2,
        );
        assert_eq!(v.ordered, Ordered::Yes);
        assert!(v.worst_margin.abs() < 1e-12);
        // d = 3 needs both first and second moments.
        let v = boolean_grain_scaling_order(
            &ScalarLaw::TwoPoint { lo: 0.1, hi: 1.9, q: 0.5 },
            &ScalarLaw::Deterministic(1.0),
            3,
        );
        assert_eq!(v.ordered, Ordered::Yes);
        // Reversed: condition not met, verdict undetermined (never "no").
        let v = boolean_grain_scaling_order(
            &ScalarLaw::Deterministic(1.0),
            &ScalarLaw::TwoPoint { lo: 0.1, hi: 1.9, q: 0.5 },
            3,
        );
        assert_eq!(v.ordered, Ordered::Undetermined);
        assert!(v.witness.is_some());
    }
}
