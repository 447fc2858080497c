//! Seeded samplers for germ processes, scenes, and the size-biased typical
//! cluster seen from a randomly chosen cluster point.

use super::{
    sample_poisson_count, ClusterPointLaw, ClusterSizeLaw, GenericClusterKind, ProcessKind,
    ProcessSpec, ScalarLaw,
};
use crate::error::ModelError;
use crate::orderings::CountingLaw;
use crate::rng::{parent_stream, stream_rng, SCENE_STREAM};
use crate::util::wrap_coord;
use rand::Rng;
use rand_distr::StandardNormal;

/// A realized germ-grain scene on a periodic window.
///
/// Coordinates are flat (`dim` entries per germ) and wrapped into
/// `[0, window)`. `cluster_ids` tag each germ with its parent index.
#[derive(Debug, Clone, PartialEq)]
pub struct GermGrainScene {
    pub dim: usize,
    pub window: f64,
    pub germs: Vec<f64>,
    pub radii: Vec<f64>,
    pub cluster_ids: Vec<u32>,
    /// Realized random intensity (mixed Poisson and Poisson scenes).
    pub realized_intensity: Option<f64>,
    pub parent_count: usize,
}

impl GermGrainScene {
    pub fn germ_count(&self) -> usize {
        self.radii.len()
    }

    pub fn germ(&self, j: usize) -> &[f64] {
        &self.germs[j * self.dim..(j + 1) * self.dim]
    }
}

/// A finite union of balls in free space (no torus): the grains attached to
/// the non-chosen points of a typical cluster.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BallUnion {
    pub dim: usize,
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl BallUnion {
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        for (c, &r) in self.centers.chunks_exact(self.dim).zip(&self.radii) {
            let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            if d2 <= r * r {
                return true;
            }
        }
        false
    }

    /// Gauge distance from `x` to the union; `+inf` when empty.
    pub fn gauge_distance_from(&self, gauge: &crate::geometry::GaugeBody, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (c, &r) in self.centers.chunks_exact(self.dim).zip(&self.radii) {
            let d = crate::geometry::distance_to_ball(gauge, x, c, r).expect("matching dims");
            if d < best {
                best = d;
            }
        }
        best
    }
}

/// Homogeneous Poisson pattern on the torus window: Poisson count, i.i.d.
/// uniform positions. Flat coordinates.
pub fn sample_poisson_pattern(lambda: f64, window: f64, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, SCENE_STREAM);
    let count = sample_poisson_count(lambda * window.powi(dim as i32), &mut rng);
    let mut out = Vec::with_capacity(count as usize * dim);
    for _ in 0..count {
        for _ in 0..dim {
            out.push(rng.random_range(0.0..window));
        }
    }
    out
}

/// One typical Neyman-Scott cluster: a size draw followed by i.i.d. offsets.
pub fn sample_cluster(
    size: &ClusterSizeLaw,
    points: &ClusterPointLaw,
    dim: usize,
    seed: u64,
) -> Result<Vec<f64>, ModelError> {
    size.validate()?;
    points.validate(dim)?;
    let mut rng = stream_rng(seed, SCENE_STREAM);
    let eta = size.sample(&mut rng);
    let mut out = Vec::with_capacity(eta as usize * dim);
    for _ in 0..eta {
        points.sample_into(dim, &mut rng, &mut out);
    }
    Ok(out)
}

/// Realize a scene from a process spec. Deterministic per `(spec, seed)`:
/// scene-level draws live on one stream, everything local to parent `k` on
/// the parent's own stream, so the realization is independent of iteration
/// order.
pub fn sample_scene(spec: &ProcessSpec, seed: u64) -> Result<GermGrainScene, ModelError> {
    spec.validate()?;
    let dim = spec.dimension;
    let window = spec.window;
    let mut scene_rng = stream_rng(seed, SCENE_STREAM);

    let (parent_rate, realized_intensity) = match &spec.process {
        ProcessKind::Poisson { lambda } => (*lambda, Some(*lambda)),
        ProcessKind::MixedPoisson { mixing } => {
            let lam = mixing.sample(&mut scene_rng);
            (lam, Some(lam))
        }
        ProcessKind::NeymanScott { lambda_parent, .. }
        | ProcessKind::GaussPoisson { lambda_parent, .. }
        | ProcessKind::GenericCluster { lambda_parent, .. } => (*lambda_parent, None),
    };

    let parent_count = sample_poisson_count(parent_rate * window.powi(dim as i32), &mut scene_rng);
    let mut parents = Vec::with_capacity(parent_count as usize * dim);
    for _ in 0..parent_count {
        for _ in 0..dim {
            parents.push(scene_rng.random_range(0.0..window));
        }
    }

    let mut germs = Vec::new();
    let mut radii = Vec::new();
    let mut cluster_ids = Vec::new();
    let mut offsets = Vec::new();
    for k in 0..parent_count as usize {
        let parent = &parents[k * dim..(k + 1) * dim];
        let mut rng = stream_rng(seed, parent_stream(k));
        offsets.clear();
        append_cluster_offsets(&spec.process, dim, &mut rng, &mut offsets);
        let n_local = offsets.len() / dim;
        for j in 0..n_local {
            for a in 0..dim {
                germs.push(wrap_coord(parent[a] + offsets[j * dim + a], window));
            }
            radii.push(spec.grain_radius.sample(&mut rng));
            cluster_ids.push(k as u32);
        }
    }

    Ok(GermGrainScene {
        dim,
        window,
        germs,
        radii,
        cluster_ids,
        realized_intensity,
        parent_count: parent_count as usize,
    })
}

/// Offsets of one full cluster of the process relative to its parent point;
/// Poisson-type processes count as singleton clusters at the parent.
pub fn append_cluster_offsets<R: Rng>(
    process: &ProcessKind,
    dim: usize,
    rng: &mut R,
    out: &mut Vec<f64>,
) {
    match process {
        ProcessKind::Poisson { .. } | ProcessKind::MixedPoisson { .. } => {
            out.extend(std::iter::repeat_n(0.0, dim));
        }
        ProcessKind::NeymanScott {
            cluster_size,
            cluster_points,
            ..
        } => {
            let eta = cluster_size.sample(rng);
            for _ in 0..eta {
                cluster_points.sample_into(dim, rng, out);
            }
        }
        ProcessKind::GaussPoisson { p, secondary, .. } => {
            // The parent point itself is always a germ.
            out.extend(std::iter::repeat_n(0.0, dim));
            if rng.random::<f64>() < *p {
                secondary.sample_into(dim, rng, out);
            }
        }
        ProcessKind::GenericCluster { cluster, .. } => {
            sample_generic_cluster(cluster, dim, rng, out);
        }
    }
}

fn sample_generic_cluster<R: Rng>(
    kind: &GenericClusterKind,
    dim: usize,
    rng: &mut R,
    out: &mut Vec<f64>,
) {
    match kind {
        GenericClusterKind::HardcorePair { half_separation } => {
            let mut u = vec![0.0; dim];
            let mut n2: f64 = 0.0;
            while n2 <= 1e-24 {
                n2 = 0.0;
                for v in u.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    n2 += *v * *v;
                }
            }
            let s = half_separation / n2.sqrt();
            for &v in &u {
                out.push(v * s);
            }
            for &v in &u {
                out.push(-v * s);
            }
        }
    }
}

/// The typical cluster seen from a randomly chosen cluster point: a chosen
/// offset plus the remaining offsets re-centered at the chosen point.
#[derive(Debug, Clone)]
pub struct PalmCluster {
    /// Position of the chosen point within the original cluster.
    pub chosen: Vec<f64>,
    /// Flat re-centered offsets of the other cluster points.
    pub others: Vec<f64>,
}

/// Reusable sampler of the Palm-weighted typical cluster.
///
/// The cluster containing the chosen point is size-biased: the number of
/// companion points follows the length-biased size law. Drawing the cluster
/// first and picking a point uniformly would weight all nonempty clusters
/// equally and misrepresent the chosen-point law.
pub struct TypicalClusterSampler {
    dim: usize,
    kind: PalmKind,
}

enum PalmKind {
    NeymanScott {
        biased: CountingLaw,
        points: ClusterPointLaw,
    },
    GaussPoisson {
        p: f64,
        secondary: ClusterPointLaw,
    },
    Generic(GenericClusterKind),
}

impl TypicalClusterSampler {
    pub fn new(spec: &ProcessSpec) -> Result<Self, ModelError> {
        spec.validate()?;
        let kind = match &spec.process {
            ProcessKind::NeymanScott {
                cluster_size,
                cluster_points,
                ..
            } => {
                let law = CountingLaw::from(cluster_size);
                let biased = law
                    .length_biased()
                    .map_err(|_| ModelError::ZeroMeanClusterSize)?;
                PalmKind::NeymanScott {
                    biased,
                    points: cluster_points.clone(),
                }
            }
            ProcessKind::GaussPoisson { p, secondary, .. } => PalmKind::GaussPoisson {
                p: *p,
                secondary: secondary.clone(),
            },
            ProcessKind::GenericCluster { cluster, .. } => PalmKind::Generic(cluster.clone()),
            ProcessKind::Poisson { .. } | ProcessKind::MixedPoisson { .. } => {
                return Err(ModelError::NotAClusterProcess)
            }
        };
        Ok(TypicalClusterSampler {
            dim: spec.dimension,
            kind,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PalmCluster {
        let dim = self.dim;
        match &self.kind {
            PalmKind::NeymanScott { biased, points } => {
                let total = 1 + biased.sample(rng);
                let mut offsets = Vec::with_capacity(total as usize * dim);
                for _ in 0..total {
                    points.sample_into(dim, rng, &mut offsets);
                }
                let chosen_idx = rng.random_range(0..total as usize);
                let chosen: Vec<f64> =
                    offsets[chosen_idx * dim..(chosen_idx + 1) * dim].to_vec();
                let mut others = Vec::with_capacity((total as usize - 1) * dim);
                for j in 0..total as usize {
                    if j == chosen_idx {
                        continue;
                    }
                    for a in 0..dim {
                        others.push(offsets[j * dim + a] - chosen[a]);
                    }
                }
                PalmCluster { chosen, others }
            }
            PalmKind::GaussPoisson { p, secondary } => {
                // Size-biased type: the chosen point sits in a two-point
                // cluster with probability 2p / (1 + p).
                let two = rng.random::<f64>() < 2.0 * p / (1.0 + p);
                if !two {
                    return PalmCluster {
                        chosen: vec![0.0; dim],
                        others: Vec::new(),
                    };
                }
                let mut y = Vec::with_capacity(dim);
                secondary.sample_into(dim, rng, &mut y);
                if rng.random::<f64>() < 0.5 {
                    // Chosen the parent: companion at +Y.
                    PalmCluster {
                        chosen: vec![0.0; dim],
                        others: y,
                    }
                } else {
                    // Chosen the secondary: companion at -Y.
                    let others = y.iter().map(|v| -v).collect();
                    PalmCluster { chosen: y, others }
                }
            }
            PalmKind::Generic(kind) => {
                let mut offsets = Vec::new();
                sample_generic_cluster(kind, dim, rng, &mut offsets);
                let total = offsets.len() / dim;
                let chosen_idx = rng.random_range(0..total);
                let chosen: Vec<f64> =
                    offsets[chosen_idx * dim..(chosen_idx + 1) * dim].to_vec();
                let mut others = Vec::with_capacity((total - 1) * dim);
                for j in 0..total {
                    if j == chosen_idx {
                        continue;
                    }
                    for a in 0..dim {
                        others.push(offsets[j * dim + a] - chosen[a]);
                    }
                }
                PalmCluster { chosen, others }
            }
        }
    }

    /// The companion germ-grain fragment: i.i.d. ball grains attached to the
    /// non-chosen offsets only.
    pub fn sample_y0<R: Rng>(&self, grain_radius: &ScalarLaw, rng: &mut R) -> BallUnion {
        let palm = self.sample(rng);
        let n = palm.others.len() / self.dim;
        let radii = (0..n).map(|_| grain_radius.sample(rng)).collect();
        BallUnion {
            dim: self.dim,
            centers: palm.others,
            radii,
        }
    }
}

/// Seeded one-shot wrapper around [`TypicalClusterSampler`].
pub fn sample_typical_cluster_palm(
    spec: &ProcessSpec,
    seed: u64,
) -> Result<PalmCluster, ModelError> {
    let sampler = TypicalClusterSampler::new(spec)?;
    let mut rng = stream_rng(seed, SCENE_STREAM);
    Ok(sampler.sample(&mut rng))
}

/// Seeded one-shot sampler of the companion fragment `Y_0`.
pub fn sample_y0(spec: &ProcessSpec, seed: u64) -> Result<BallUnion, ModelError> {
    let sampler = TypicalClusterSampler::new(spec)?;
    let mut rng = stream_rng(seed, SCENE_STREAM);
    Ok(sampler.sample_y0(&spec.grain_radius, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::IntensityLaw;

    fn ns_spec(lambda_parent: f64, mean_size: f64, sigma: f64) -> ProcessSpec {
        ProcessSpec::neyman_scott(
            lambda_parent,
            ClusterSizeLaw::Poisson { mean: mean_size },
            ClusterPointLaw::IsotropicGaussian { sigma },
            ScalarLaw::zero(),
            20.0,
            2,
        )
    }

    #[test]
    fn zero_intensity_empty_pattern() {
        assert!(sample_poisson_pattern(0.0, 10.0, 2, 1).is_empty());
    }

    #[test]
    fn poisson_count_moments() {
        // lambda = 1, L = 10, d = 2: counts are Poisson(100).
        let mut counts = Vec::new();
        for seed in 0..1000u64 {
            counts.push(sample_poisson_pattern(1.0, 10.0, 2, seed).len() as f64 / 2.0);
        }
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!(
            (mean - 100.0).abs() <= 4.0 * (100.0f64 / 1000.0).sqrt(),
            "mean count {mean}"
        );
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 999.0;
        assert!((var - 100.0).abs() <= 15.0, "count variance {var}");
    }

    #[test]
    fn cluster_sampler_mean_size() {
        let size = ClusterSizeLaw::Poisson { mean: 3.0 };
        let points = ClusterPointLaw::IsotropicGaussian { sigma: 1.0 };
        let mut total = 0usize;
        let n = 4000;
        for seed in 0..n {
            total += sample_cluster(&size, &points, 2, seed).unwrap().len() / 2;
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 3.0).abs() < 0.12, "mean cluster size {mean}");
    }

    #[test]
    fn scenes_are_deterministic() {
        let spec = ns_spec(0.05, 2.0, 0.5);
        let a = sample_scene(&spec, 99).unwrap();
        let b = sample_scene(&spec, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_scene(&spec, 100).unwrap();
        assert!(a.germs != c.germs);
    }

    #[test]
    fn mixed_degenerate_equals_poisson_scene() {
        let poisson = ProcessSpec::poisson(0.7, ScalarLaw::Deterministic(0.4), 15.0, 2);
        let mixed = ProcessSpec {
            process: ProcessKind::MixedPoisson {
                mixing: IntensityLaw::Degenerate { value: 0.7 },
            },
            grain_radius: ScalarLaw::Deterministic(0.4),
            window: 15.0,
            dimension: 2,
        };
        for seed in [0u64, 5, 123] {
            assert_eq!(
                sample_scene(&poisson, seed).unwrap(),
                sample_scene(&mixed, seed).unwrap()
            );
        }
    }

    #[test]
    fn cluster_intensity_bookkeeping() {
        // Empirical germ count / L^d within 4 standard errors of
        // lambda_parent * gamma over 500 replications.
        let spec = ns_spec(0.05, 2.0, 0.5);
        let reps = 500;
        let mut counts = Vec::with_capacity(reps);
        for seed in 0..reps as u64 {
            counts.push(sample_scene(&spec, seed).unwrap().germ_count() as f64 / 400.0);
        }
        let (mean, se) = crate::util::mean_se(&counts);
        let se = se.unwrap();
        assert!(
            (mean - 0.1).abs() <= 4.0 * se,
            "empirical intensity {mean} vs 0.1 (se {se})"
        );
    }

    #[test]
    fn poisson_matches_singleton_cluster_counts() {
        // Poisson germs and Neyman-Scott with deterministic singleton
        // clusters (narrow offsets) agree in count distribution.
        let poisson = ProcessSpec::poisson(0.5, ScalarLaw::zero(), 20.0, 2);
        let ns = ProcessSpec::neyman_scott(
            0.5,
            ClusterSizeLaw::Deterministic { k: 1 },
            ClusterPointLaw::IsotropicGaussian { sigma: 1e-6 },
            ScalarLaw::zero(),
            20.0,
            2,
        );
        let reps = 400;
        let mut counts_p = Vec::with_capacity(reps);
        let mut counts_ns = Vec::with_capacity(reps);
        for seed in 0..reps as u64 {
            counts_p.push(sample_scene(&poisson, seed).unwrap().germ_count() as f64);
            counts_ns.push(sample_scene(&ns, seed).unwrap().germ_count() as f64);
        }
        let (mp, sp) = crate::util::mean_se(&counts_p);
        let (mn, sn) = crate::util::mean_se(&counts_ns);
        let joint = (sp.unwrap().powi(2) + sn.unwrap().powi(2)).sqrt();
        assert!((mp - mn).abs() <= 4.0 * joint, "{mp} vs {mn}");
        // Both match the target mean 0.5 * 400 = 200.
        assert!((mp - 200.0).abs() <= 4.0 * sp.unwrap());
        // Variance of the counts is Poissonian for both.
        let var = |v: &[f64], m: f64| v.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!((var(&counts_ns, mn) / 200.0 - 1.0).abs() < 0.2);
    }

    #[test]
    fn gauss_poisson_includes_parent_and_intensity() {
        let spec = ProcessSpec {
            process: ProcessKind::GaussPoisson {
                lambda_parent: 0.1,
                p: 0.5,
                secondary: ClusterPointLaw::IsotropicGaussian { sigma: 0.3 },
            },
            grain_radius: ScalarLaw::zero(),
            window: 20.0,
            dimension: 2,
        };
        let mut counts = Vec::new();
        for seed in 0..400u64 {
            counts.push(sample_scene(&spec, seed).unwrap().germ_count() as f64 / 400.0);
        }
        let (mean, se) = crate::util::mean_se(&counts);
        assert!(
            (mean - 0.15).abs() <= 4.0 * se.unwrap(),
            "gauss-poisson intensity {mean}"
        );
    }

    #[test]
    fn stationarity_proxy_subbox_counts() {
        let spec = ns_spec(0.1, 2.0, 0.5);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for seed in 0..400u64 {
            let scene = sample_scene(&spec, seed).unwrap();
            let mut l = 0.0;
            let mut r = 0.0;
            for j in 0..scene.germ_count() {
                if scene.germ(j)[0] < 10.0 {
                    l += 1.0;
                } else {
                    r += 1.0;
                }
            }
            left.push(l);
            right.push(r);
        }
        let (ml, sl) = crate::util::mean_se(&left);
        let (mr, sr) = crate::util::mean_se(&right);
        let joint = (sl.unwrap().powi(2) + sr.unwrap().powi(2)).sqrt();
        assert!((ml - mr).abs() <= 4.0 * joint, "{ml} vs {mr}");
    }

    #[test]
    fn palm_deterministic_singleton() {
        let spec = ns_spec(0.1, 1.0, 0.5);
        let spec = ProcessSpec {
            process: ProcessKind::NeymanScott {
                lambda_parent: 0.1,
                cluster_size: ClusterSizeLaw::Deterministic { k: 1 },
                cluster_points: ClusterPointLaw::IsotropicGaussian { sigma: 0.5 },
            },
            ..spec
        };
        for seed in 0..50u64 {
            let palm = sample_typical_cluster_palm(&spec, seed).unwrap();
            assert!(palm.others.is_empty());
            let y0 = sample_y0(&spec, seed).unwrap();
            assert!(y0.is_empty());
        }
    }

    #[test]
    fn palm_rejects_non_cluster_and_zero_mean() {
        let poisson = ProcessSpec::poisson(1.0, ScalarLaw::zero(), 10.0, 2);
        assert!(matches!(
            sample_typical_cluster_palm(&poisson, 0),
            Err(ModelError::NotAClusterProcess)
        ));
    }

    #[test]
    fn palm_size_biasing_poisson_sizes() {
        // The cluster containing the chosen point has 1 + Poisson(c) points.
        // Chi-square test at the 1% level against that law, c = 1.
        let spec = ns_spec(0.1, 1.0, 0.5);
        let sampler = TypicalClusterSampler::new(&spec).unwrap();
        let mut rng = stream_rng(42, SCENE_STREAM);
        let n = 20_000;
        let max_k = 8usize; // companion counts 0..7 plus tail
        let mut observed = vec![0.0; max_k + 1];
        for _ in 0..n {
            let companions = sampler.sample(&mut rng).others.len() / 2;
            observed[companions.min(max_k)] += 1.0;
        }
        // Companions ~ Poisson(1).
        let mut expected = vec![0.0; max_k + 1];
        let mut acc = 0.0;
        let mut pk = (-1.0f64).exp();
        for k in 0..max_k {
            expected[k] = n as f64 * pk;
            acc += pk;
            pk /= (k + 1) as f64;
        }
        expected[max_k] = n as f64 * (1.0 - acc);
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e).powi(2) / e)
            .sum();
        // 1% critical value of chi-square with max_k degrees of freedom.
        let crit = {
            use statrs::distribution::{ChiSquared, ContinuousCDF};
            ChiSquared::new(max_k as f64).unwrap().inverse_cdf(0.99)
        };
        assert!(chi2 <= crit, "chi2 {chi2} > critical {crit}");
    }

    #[test]
    fn palm_gauss_poisson_size_biased_frequency() {
        // P(chosen cluster had two points) = 2p / (1 + p).
        let p = 0.4;
        let spec = ProcessSpec {
            process: ProcessKind::GaussPoisson {
                lambda_parent: 0.1,
                p,
                secondary: ClusterPointLaw::IsotropicGaussian { sigma: 0.3 },
            },
            grain_radius: ScalarLaw::zero(),
            window: 20.0,
            dimension: 2,
        };
        let sampler = TypicalClusterSampler::new(&spec).unwrap();
        let mut rng = stream_rng(7, SCENE_STREAM);
        let n = 40_000;
        let mut two = 0.0;
        for _ in 0..n {
            if !sampler.sample(&mut rng).others.is_empty() {
                two += 1.0;
            }
        }
        let expected = 2.0 * p / (1.0 + p);
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!(
            (two / n as f64 - expected).abs() <= 4.0 * se,
            "freq {} vs {expected}",
            two / n as f64
        );
    }

    #[test]
    fn y0_empty_with_positive_probability() {
        // P(card L_0 = 1) > 0 implies P(Y_0 empty) > 0.
        let spec = ns_spec(0.1, 2.0, 0.5);
        let sampler = TypicalClusterSampler::new(&spec).unwrap();
        let mut rng = stream_rng(3, SCENE_STREAM);
        let mut empty = 0;
        for _ in 0..2000 {
            if sampler.sample_y0(&ScalarLaw::Deterministic(0.3), &mut rng).is_empty() {
                empty += 1;
            }
        }
        // Companions ~ Poisson(2): P(empty) = e^{-2} = 0.135.
        let f = empty as f64 / 2000.0;
        assert!((f - (-2.0f64).exp()).abs() < 0.04, "empty fraction {f}");
    }

    #[test]
    fn hardcore_pair_separation_exact() {
        let spec = ProcessSpec {
            process: ProcessKind::GenericCluster {
                lambda_parent: 0.1,
                cluster: GenericClusterKind::HardcorePair { half_separation: 0.5 },
            },
            grain_radius: ScalarLaw::Deterministic(0.5),
            window: 20.0,
            dimension: 2,
        };
        let scene = sample_scene(&spec, 11).unwrap();
        assert_eq!(scene.germ_count(), 2 * scene.parent_count);
        let palm = sample_typical_cluster_palm(&spec, 4).unwrap();
        let d: f64 = palm.others.iter().map(|v| v * v).sum::<f64>();
        assert!((d.sqrt() - 1.0).abs() < 1e-12);
    }
}
