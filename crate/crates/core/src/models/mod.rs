//! Declarative germ-process and grain-law descriptions plus their samplers.

mod scene;

pub use scene::{
    append_cluster_offsets, sample_cluster, sample_poisson_pattern, sample_scene,
    sample_typical_cluster_palm, sample_y0, BallUnion, GermGrainScene, PalmCluster,
    TypicalClusterSampler,
};

use crate::error::ModelError;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

/// Law of a nonnegative scalar: grain radii and scaling variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarLaw {
    Deterministic { value: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `lo` with probability `q`, `hi` otherwise.
    TwoPoint { lo: f64, hi: f64, q: f64 },
}

impl ScalarLaw {
    #[allow(non_snake_case)]
    pub fn Deterministic(value: f64) -> Self {
        ScalarLaw::Deterministic { value }
    }

    pub fn zero() -> Self {
        ScalarLaw::Deterministic { value: 0.0 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match self {
            ScalarLaw::Deterministic { value } => value.is_finite() && *value >= 0.0,
            ScalarLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && 0.0 <= *lo && lo < hi,
            ScalarLaw::TwoPoint { lo, hi, q } => {
                lo.is_finite() && hi.is_finite() && 0.0 <= *lo && lo <= hi && (0.0..=1.0).contains(q)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!("scalar law {self:?}")))
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarLaw::Deterministic { value } if *value == 0.0)
    }

    /// Raw moment `E[X^k]`.
    pub fn moment(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match self {
            ScalarLaw::Deterministic { value } => value.powi(k as i32),
            ScalarLaw::Uniform { lo, hi } => {
                let p = k as i32 + 1;
                (hi.powi(p) - lo.powi(p)) / ((k + 1) as f64 * (hi - lo))
            }
            ScalarLaw::TwoPoint { lo, hi, q } => {
                q * lo.powi(k as i32) + (1.0 - q) * hi.powi(k as i32)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        self.moment(2) - self.mean().powi(2)
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            ScalarLaw::Deterministic { value } => *value,
            ScalarLaw::Uniform { hi, .. } | ScalarLaw::TwoPoint { hi, .. } => *hi,
        }
    }

    /// Survival function `P(X > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            ScalarLaw::Deterministic { value } => {
                if *value > t {
                    1.0
                } else {
                    0.0
                }
            }
            ScalarLaw::Uniform { lo, hi } => ((hi - t.max(*lo)) / (hi - lo)).clamp(0.0, 1.0),
            ScalarLaw::TwoPoint { lo, hi, q } => {
                let mut s = 0.0;
                if *lo > t {
                    s += q;
                }
                if *hi > t {
                    s += 1.0 - q;
                }
                s
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            ScalarLaw::Deterministic { value } => *value,
            ScalarLaw::Uniform { lo, hi } => rng.random_range(*lo..*hi),
            ScalarLaw::TwoPoint { lo, hi, q } => {
                if rng.random::<f64>() < *q {
                    *lo
                } else {
                    *hi
                }
            }
        }
    }
}

/// Cluster size distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClusterSizeLaw {
    Deterministic { k: u32 },
    Poisson { mean: f64 },
    Binomial { n: u32, p: f64 },
    /// `P(eta = k) = C(k + r - 1, k) p^r (1 - p)^k`; the length-biased law is
    /// negative binomial with parameters `(p, r + 1)` under this convention.
    NegativeBinomial { p: f64, r: f64 },
    /// One point with probability `1 - p`, two with probability `p`.
    GaussPoissonSize { p: f64 },
    /// Sum of `outer` i.i.d. copies of `inner`.
    Compound {
        outer: Box<ClusterSizeLaw>,
        inner: Box<ClusterSizeLaw>,
    },
}

impl ClusterSizeLaw {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match self {
            ClusterSizeLaw::Deterministic { .. } => true,
            ClusterSizeLaw::Poisson { mean } => mean.is_finite() && *mean >= 0.0,
            ClusterSizeLaw::Binomial { p, .. } => (0.0..=1.0).contains(p),
            ClusterSizeLaw::NegativeBinomial { p, r } => *p > 0.0 && *p <= 1.0 && *r > 0.0,
            ClusterSizeLaw::GaussPoissonSize { p } => (0.0..=1.0).contains(p),
            ClusterSizeLaw::Compound { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                true
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!("size law {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ClusterSizeLaw::Deterministic { k } => *k as f64,
            ClusterSizeLaw::Poisson { mean } => *mean,
            ClusterSizeLaw::Binomial { n, p } => *n as f64 * p,
            ClusterSizeLaw::NegativeBinomial { p, r } => r * (1.0 - p) / p,
            ClusterSizeLaw::GaussPoissonSize { p } => 1.0 + p,
            ClusterSizeLaw::Compound { outer, inner } => outer.mean() * inner.mean(),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        match self {
            ClusterSizeLaw::Deterministic { k } => *k,
            ClusterSizeLaw::Poisson { mean } => sample_poisson_count(*mean, rng),
            ClusterSizeLaw::Binomial { n, p } => {
                let law = rand_distr::Binomial::new(*n as u64, *p).expect("validated");
                law.sample(rng) as u32
            }
            ClusterSizeLaw::NegativeBinomial { p, r } => {
                // Gamma-Poisson mixture: rate Gamma(r, (1-p)/p), then Poisson.
                if *p >= 1.0 {
                    return 0;
                }
                let gamma = Gamma::new(*r, (1.0 - p) / p).expect("validated");
                sample_poisson_count(gamma.sample(rng), rng)
            }
            ClusterSizeLaw::GaussPoissonSize { p } => {
                if rng.random::<f64>() < *p {
                    2
                } else {
                    1
                }
            }
            ClusterSizeLaw::Compound { outer, inner } => {
                let n = outer.sample(rng);
                (0..n).map(|_| inner.sample(rng)).sum()
            }
        }
    }
}

pub(crate) fn sample_poisson_count<R: Rng>(mean: f64, rng: &mut R) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let law = rand_distr::Poisson::new(mean).expect("positive mean");
    let v: f64 = law.sample(rng);
    v as u32
}

/// Displacement law of cluster points; all variants are absolutely
/// continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClusterPointLaw {
    IsotropicGaussian { sigma: f64 },
    UniformBall { radius: f64 },
    UniformBox { half_widths: Vec<f64> },
}

impl ClusterPointLaw {
    pub fn validate(&self, dim: usize) -> Result<(), ModelError> {
        let ok = match self {
            ClusterPointLaw::IsotropicGaussian { sigma } => *sigma > 0.0,
            ClusterPointLaw::UniformBall { radius } => *radius > 0.0,
            ClusterPointLaw::UniformBox { half_widths } => {
                half_widths.len() == dim && half_widths.iter().all(|h| *h > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!("point law {self:?}")))
        }
    }

    /// Rough spatial extent, used for torus-safety warnings.
    pub fn scale(&self) -> f64 {
        match self {
            ClusterPointLaw::IsotropicGaussian { sigma } => 3.0 * sigma,
            ClusterPointLaw::UniformBall { radius } => *radius,
            ClusterPointLaw::UniformBox { half_widths } => {
                half_widths.iter().copied().fold(0.0, f64::max)
            }
        }
    }

    pub fn sample_into<R: Rng>(&self, dim: usize, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            ClusterPointLaw::IsotropicGaussian { sigma } => {
                for _ in 0..dim {
                    let g: f64 = rng.sample(rand_distr::StandardNormal);
                    out.push(sigma * g);
                }
            }
            ClusterPointLaw::UniformBall { radius } => loop {
                let start = out.len();
                let mut n2 = 0.0;
                for _ in 0..dim {
                    let v = rng.random_range(-1.0..1.0);
                    n2 += v * v;
                    out.push(v);
                }
                if n2 <= 1.0 {
                    for v in &mut out[start..] {
                        *v *= radius;
                    }
                    break;
                }
                out.truncate(start);
            },
            ClusterPointLaw::UniformBox { half_widths } => {
                for h in half_widths {
                    out.push(rng.random_range(-h..*h));
                }
            }
        }
    }
}

/// Random intensity of a mixed Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensityLaw {
    Degenerate { value: f64 },
    /// Density `rate^shape / Gamma(shape) x^{shape-1} e^{-rate x}`;
    /// mean `shape / rate`.
    Gamma { shape: f64, rate: f64 },
    /// `lo` with probability `q`, `hi` otherwise.
    TwoPoint { lo: f64, hi: f64, q: f64 },
}

impl IntensityLaw {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match self {
            IntensityLaw::Degenerate { value } => *value > 0.0 && value.is_finite(),
            IntensityLaw::Gamma { shape, rate } => *shape > 0.0 && *rate > 0.0,
            IntensityLaw::TwoPoint { lo, hi, q } => {
                *lo >= 0.0 && *hi >= *lo && *hi > 0.0 && (0.0..=1.0).contains(q)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!("intensity law {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            IntensityLaw::Degenerate { value } => *value,
            IntensityLaw::Gamma { shape, rate } => shape / rate,
            IntensityLaw::TwoPoint { lo, hi, q } => q * lo + (1.0 - q) * hi,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            IntensityLaw::Degenerate { .. } => 0.0,
            IntensityLaw::Gamma { shape, rate } => shape / (rate * rate),
            IntensityLaw::TwoPoint { lo, hi, q } => {
                let m = self.mean();
                q * (lo - m).powi(2) + (1.0 - q) * (hi - m).powi(2)
            }
        }
    }

    /// Laplace transform `E[e^{-s Lambda}]` for `s >= 0`.
    pub fn laplace(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match self {
            IntensityLaw::Degenerate { value } => (-s * value).exp(),
            IntensityLaw::Gamma { shape, rate } => (rate / (rate + s)).powf(*shape),
            IntensityLaw::TwoPoint { lo, hi, q } => {
                q * (-s * lo).exp() + (1.0 - q) * (-s * hi).exp()
            }
        }
    }

    /// `E[Lambda e^{-s Lambda}] / E[e^{-s Lambda}]`, the negative logarithmic
    /// derivative of the Laplace transform. Nonincreasing in `s`.
    pub fn laplace_ratio(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match self {
            IntensityLaw::Degenerate { value } => *value,
            IntensityLaw::Gamma { shape, rate } => shape / (rate + s),
            IntensityLaw::TwoPoint { lo, hi, q } => {
                let a = q * (-s * lo).exp();
                let b = (1.0 - q) * (-s * hi).exp();
                (a * lo + b * hi) / (a + b)
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            IntensityLaw::Degenerate { value } => *value,
            IntensityLaw::Gamma { shape, rate } => {
                Gamma::new(*shape, 1.0 / rate).expect("validated").sample(rng)
            }
            IntensityLaw::TwoPoint { lo, hi, q } => {
                if rng.random::<f64>() < *q {
                    *lo
                } else {
                    *hi
                }
            }
        }
    }
}

/// Named cluster configurations beyond the Neyman-Scott / Gauss-Poisson
/// families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum GenericClusterKind {
    /// A pair of points at fixed separation `2 * half_separation` in a
    /// uniformly random orientation; the minimal inter-point distance within
    /// a cluster is exactly the separation.
    HardcorePair { half_separation: f64 },
}

impl GenericClusterKind {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            GenericClusterKind::HardcorePair { half_separation } => {
                if *half_separation > 0.0 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidParameter(
                        "hardcore pair separation must be positive".into(),
                    ))
                }
            }
        }
    }

    pub fn mean_size(&self) -> f64 {
        match self {
            GenericClusterKind::HardcorePair { .. } => 2.0,
        }
    }

    pub fn prob_nonempty(&self) -> f64 {
        1.0
    }

    pub fn scale(&self) -> f64 {
        match self {
            GenericClusterKind::HardcorePair { half_separation } => 2.0 * half_separation,
        }
    }
}

/// Germ process variants.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    Poisson {
        lambda: f64,
    },
    NeymanScott {
        lambda_parent: f64,
        cluster_size: ClusterSizeLaw,
        cluster_points: ClusterPointLaw,
    },
    GaussPoisson {
        lambda_parent: f64,
        p: f64,
        secondary: ClusterPointLaw,
    },
    GenericCluster {
        lambda_parent: f64,
        cluster: GenericClusterKind,
    },
    MixedPoisson {
        mixing: IntensityLaw,
    },
}

/// Declarative description of a germ-grain model: germ process, grain radius
/// law, torus window side and dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ProcessSpec {
    pub process: ProcessKind,
    pub grain_radius: ScalarLaw,
    pub window: f64,
    pub dimension: usize,
}

impl ProcessSpec {
    pub fn poisson(lambda: f64, grain_radius: ScalarLaw, window: f64, dimension: usize) -> Self {
        ProcessSpec {
            process: ProcessKind::Poisson { lambda },
            grain_radius,
            window,
            dimension,
        }
    }

    pub fn neyman_scott(
        lambda_parent: f64,
        cluster_size: ClusterSizeLaw,
        cluster_points: ClusterPointLaw,
        grain_radius: ScalarLaw,
        window: f64,
        dimension: usize,
    ) -> Self {
        ProcessSpec {
            process: ProcessKind::NeymanScott {
                lambda_parent,
                cluster_size,
                cluster_points,
            },
            grain_radius,
            window,
            dimension,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.window > 0.0) || self.dimension == 0 {
            return Err(ModelError::InvalidParameter(
                "window must be positive and dimension >= 1".into(),
            ));
        }
        self.grain_radius.validate()?;
        match &self.process {
            ProcessKind::Poisson { lambda } => {
                if !(*lambda >= 0.0) || !lambda.is_finite() {
                    return Err(ModelError::InvalidParameter(format!(
                        "intensity must be finite and nonnegative, got {lambda}"
                    )));
                }
            }
            ProcessKind::NeymanScott {
                lambda_parent,
                cluster_size,
                cluster_points,
            } => {
                check_parent_intensity(*lambda_parent)?;
                cluster_size.validate()?;
                cluster_points.validate(self.dimension)?;
                if !(cluster_size.mean() > 0.0) {
                    return Err(ModelError::ZeroMeanClusterSize);
                }
            }
            ProcessKind::GaussPoisson {
                lambda_parent,
                p,
                secondary,
            } => {
                check_parent_intensity(*lambda_parent)?;
                if !(0.0..=1.0).contains(p) {
                    return Err(ModelError::InvalidParameter(format!(
                        "secondary-point probability must lie in [0, 1], got {p}"
                    )));
                }
                secondary.validate(self.dimension)?;
            }
            ProcessKind::GenericCluster {
                lambda_parent,
                cluster,
            } => {
                check_parent_intensity(*lambda_parent)?;
                cluster.validate()?;
            }
            ProcessKind::MixedPoisson { mixing } => mixing.validate()?,
        }
        Ok(())
    }

    /// Total germ intensity: `lambda_parent * mean cluster size` for cluster
    /// processes, `E[Lambda]` for mixed Poisson.
    pub fn intensity(&self) -> f64 {
        match &self.process {
            ProcessKind::Poisson { lambda } => *lambda,
            ProcessKind::NeymanScott {
                lambda_parent,
                cluster_size,
                ..
            } => lambda_parent * cluster_size.mean(),
            ProcessKind::GaussPoisson {
                lambda_parent, p, ..
            } => lambda_parent * (1.0 + p),
            ProcessKind::GenericCluster {
                lambda_parent,
                cluster,
            } => lambda_parent * cluster.mean_size(),
            ProcessKind::MixedPoisson { mixing } => mixing.mean(),
        }
    }

    /// Mean cluster size; 1 for Poisson-type processes.
    pub fn mean_cluster_size(&self) -> f64 {
        match &self.process {
            ProcessKind::Poisson { .. } | ProcessKind::MixedPoisson { .. } => 1.0,
            ProcessKind::NeymanScott { cluster_size, .. } => cluster_size.mean(),
            ProcessKind::GaussPoisson { p, .. } => 1.0 + p,
            ProcessKind::GenericCluster { cluster, .. } => cluster.mean_size(),
        }
    }

    pub fn is_cluster(&self) -> bool {
        matches!(
            self.process,
            ProcessKind::NeymanScott { .. }
                | ProcessKind::GaussPoisson { .. }
                | ProcessKind::GenericCluster { .. }
        )
    }

    pub fn has_point_grains(&self) -> bool {
        self.grain_radius.is_zero()
    }

    /// Cluster spatial extent, used for torus-safety warnings.
    pub fn cluster_scale(&self) -> f64 {
        match &self.process {
            ProcessKind::Poisson { .. } | ProcessKind::MixedPoisson { .. } => 0.0,
            ProcessKind::NeymanScott { cluster_points, .. } => 2.0 * cluster_points.scale(),
            ProcessKind::GaussPoisson { secondary, .. } => secondary.scale(),
            ProcessKind::GenericCluster { cluster, .. } => cluster.scale(),
        }
    }

    /// Warnings about dilations approaching the torus validity bound.
    pub fn torus_warnings(&self, t_max: f64) -> Vec<String> {
        let mut out = Vec::new();
        let reach = self.cluster_scale() + self.grain_radius.upper_bound() + t_max;
        if reach > self.window / 4.0 {
            out.push(format!(
                "cluster scale + grain radius + max dilation = {reach:.3} exceeds window/4 = {:.3}; \
                 periodic wrap-around may bias results",
                self.window / 4.0
            ));
        }
        out
    }

    /// Deterministic fingerprint for run manifests.
    pub fn fingerprint(&self) -> u64 {
        crate::util::fnv1a64(format!("{self:?}").as_bytes())
    }
}

fn check_parent_intensity(lambda: f64) -> Result<(), ModelError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(format!(
            "parent intensity must be positive and finite, got {lambda}"
        )))
    }
}

/// Serialized form with the fixed field vocabulary
/// `{type, lambda_parent, cluster_size, cluster_points, grain_radius,
/// window, dimension, mixing}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_parent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster_size: Option<ClusterSizeLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster_points: Option<ClusterPointsField>,
    grain_radius: ScalarLaw,
    window: f64,
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mixing: Option<IntensityLaw>,
}

/// The `cluster_points` field doubles as the configuration slot for generic
/// cluster samplers.
#[derive(Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
enum ClusterPointsField {
    IsotropicGaussian { sigma: f64 },
    UniformBall { radius: f64 },
    UniformBox { half_widths: Vec<f64> },
    HardcorePair { half_separation: f64 },
}

impl From<ClusterPointLaw> for ClusterPointsField {
    fn from(law: ClusterPointLaw) -> Self {
        match law {
            ClusterPointLaw::IsotropicGaussian { sigma } => {
                ClusterPointsField::IsotropicGaussian { sigma }
            }
            ClusterPointLaw::UniformBall { radius } => ClusterPointsField::UniformBall { radius },
            ClusterPointLaw::UniformBox { half_widths } => {
                ClusterPointsField::UniformBox { half_widths }
            }
        }
    }
}

impl TryFrom<ClusterPointsField> for ClusterPointLaw {
    type Error = ModelError;
    fn try_from(f: ClusterPointsField) -> Result<Self, ModelError> {
        match f {
            ClusterPointsField::IsotropicGaussian { sigma } => {
                Ok(ClusterPointLaw::IsotropicGaussian { sigma })
            }
            ClusterPointsField::UniformBall { radius } => {
                Ok(ClusterPointLaw::UniformBall { radius })
            }
            ClusterPointsField::UniformBox { half_widths } => {
                Ok(ClusterPointLaw::UniformBox { half_widths })
            }
            ClusterPointsField::HardcorePair { .. } => Err(ModelError::InvalidParameter(
                "hardcore_pair is only valid for generic_cluster specs".into(),
            )),
        }
    }
}

impl From<ProcessSpec> for RawSpec {
    fn from(spec: ProcessSpec) -> RawSpec {
        let mut raw = RawSpec {
            kind: String::new(),
            lambda_parent: None,
            cluster_size: None,
            cluster_points: None,
            grain_radius: spec.grain_radius,
            window: spec.window,
            dimension: spec.dimension,
            mixing: None,
        };
        match spec.process {
            ProcessKind::Poisson { lambda } => {
                raw.kind = "poisson".into();
                raw.lambda_parent = Some(lambda);
            }
            ProcessKind::NeymanScott {
                lambda_parent,
                cluster_size,
                cluster_points,
            } => {
                raw.kind = "neyman_scott".into();
                raw.lambda_parent = Some(lambda_parent);
                raw.cluster_size = Some(cluster_size);
                raw.cluster_points = Some(cluster_points.into());
            }
            ProcessKind::GaussPoisson {
                lambda_parent,
                p,
                secondary,
            } => {
                raw.kind = "gauss_poisson".into();
                raw.lambda_parent = Some(lambda_parent);
                raw.cluster_size = Some(ClusterSizeLaw::GaussPoissonSize { p });
                raw.cluster_points = Some(secondary.into());
            }
            ProcessKind::GenericCluster {
                lambda_parent,
                cluster,
            } => {
                raw.kind = "generic_cluster".into();
                raw.lambda_parent = Some(lambda_parent);
                let GenericClusterKind::HardcorePair { half_separation } = cluster;
                raw.cluster_points = Some(ClusterPointsField::HardcorePair { half_separation });
            }
            ProcessKind::MixedPoisson { mixing } => {
                raw.kind = "mixed_poisson".into();
                raw.mixing = Some(mixing);
            }
        }
        raw
    }
}

impl TryFrom<RawSpec> for ProcessSpec {
    type Error = ModelError;
    fn try_from(raw: RawSpec) -> Result<ProcessSpec, ModelError> {
        let missing = |f: &str| ModelError::InvalidParameter(format!("missing field {f:?}"));
        let process = match raw.kind.as_str() {
            "poisson" => ProcessKind::Poisson {
                lambda: raw.lambda_parent.ok_or_else(|| missing("lambda_parent"))?,
            },
            "neyman_scott" => ProcessKind::NeymanScott {
                lambda_parent: raw.lambda_parent.ok_or_else(|| missing("lambda_parent"))?,
                cluster_size: raw.cluster_size.ok_or_else(|| missing("cluster_size"))?,
                cluster_points: raw
                    .cluster_points
                    .ok_or_else(|| missing("cluster_points"))?
                    .try_into()?,
            },
            "gauss_poisson" => {
                let p = match raw.cluster_size {
                    Some(ClusterSizeLaw::GaussPoissonSize { p }) => p,
                    _ => {
                        return Err(ModelError::InvalidParameter(
                            "gauss_poisson requires cluster_size law gauss_poisson_size".into(),
                        ))
                    }
                };
                ProcessKind::GaussPoisson {
                    lambda_parent: raw.lambda_parent.ok_or_else(|| missing("lambda_parent"))?,
                    p,
                    secondary: raw
                        .cluster_points
                        .ok_or_else(|| missing("cluster_points"))?
                        .try_into()?,
                }
            }
            "generic_cluster" => {
                let cluster = match raw.cluster_points {
                    Some(ClusterPointsField::HardcorePair { half_separation }) => {
                        GenericClusterKind::HardcorePair { half_separation }
                    }
                    _ => {
                        return Err(ModelError::InvalidParameter(
                            "generic_cluster requires a named cluster law in cluster_points"
                                .into(),
                        ))
                    }
                };
                ProcessKind::GenericCluster {
                    lambda_parent: raw.lambda_parent.ok_or_else(|| missing("lambda_parent"))?,
                    cluster,
                }
            }
            "mixed_poisson" => ProcessKind::MixedPoisson {
                mixing: raw.mixing.ok_or_else(|| missing("mixing"))?,
            },
            other => {
                return Err(ModelError::InvalidParameter(format!(
                    "unknown process type {other:?}"
                )))
            }
        };
        let spec = ProcessSpec {
            process,
            grain_radius: raw.grain_radius,
            window: raw.window,
            dimension: raw.dimension,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_law_moments_and_survival() {
        let u = ScalarLaw::Uniform { lo: 0.0, hi: 2.0 };
        assert!((u.mean() - 1.0).abs() < 1e-12);
        assert!((u.moment(2) - 4.0 / 3.0).abs() < 1e-12);
        assert!((u.survival(0.5) - 0.75).abs() < 1e-12);
        let tp = ScalarLaw::TwoPoint { lo: 0.1, hi: 1.9, q: 0.5 };
        assert!((tp.moment(2) - (0.01 + 3.61) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_size_means() {
        assert_eq!(ClusterSizeLaw::Poisson { mean: 2.0 }.mean(), 2.0);
        assert_eq!(ClusterSizeLaw::GaussPoissonSize { p: 0.3 }.mean(), 1.3);
        let comp = ClusterSizeLaw::Compound {
            outer: Box::new(ClusterSizeLaw::Poisson { mean: 2.0 }),
            inner: Box::new(ClusterSizeLaw::Deterministic { k: 3 }),
        };
        assert_eq!(comp.mean(), 6.0);
    }

    #[test]
    fn gamma_intensity_laplace() {
        let g = IntensityLaw::Gamma { shape: 2.0, rate: 3.0 };
        assert!((g.laplace(1.0) - (3.0f64 / 4.0).powi(2)).abs() < 1e-12);
        assert!((g.laplace_ratio(1.0) - 0.5).abs() < 1e-12);
        assert!((g.mean() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn intensity_consistency_for_cluster_specs() {
        let ns = ProcessSpec::neyman_scott(
            0.05,
            ClusterSizeLaw::Poisson { mean: 2.0 },
            ClusterPointLaw::IsotropicGaussian { sigma: 0.5 },
            ScalarLaw::zero(),
            20.0,
            2,
        );
        ns.validate().unwrap();
        assert!((ns.intensity() - 0.1).abs() < 1e-12);
        let gp = ProcessSpec {
            process: ProcessKind::GaussPoisson {
                lambda_parent: 0.1,
                p: 0.4,
                secondary: ClusterPointLaw::UniformBall { radius: 1.0 },
            },
            grain_radius: ScalarLaw::zero(),
            window: 20.0,
            dimension: 2,
        };
        assert!((gp.intensity() - 0.14).abs() < 1e-12);
    }

    #[test]
    fn spec_json_roundtrip_fixed_fields() {
        let ns = ProcessSpec::neyman_scott(
            0.05,
            ClusterSizeLaw::Poisson { mean: 2.0 },
            ClusterPointLaw::IsotropicGaussian { sigma: 0.5 },
            ScalarLaw::Deterministic(0.3),
            20.0,
            2,
        );
        let json = serde_json::to_string(&ns).unwrap();
        assert!(json.contains("\"type\":\"neyman_scott\""));
        assert!(json.contains("\"lambda_parent\""));
        assert!(json.contains("\"cluster_points\""));
        let back: ProcessSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(ns, back);
        // Round-trip idempotence.
        assert_eq!(json, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn unknown_fields_rejected() {
        let json = r#"{"type":"poisson","lambda_parent":1.0,
            "grain_radius":{"law":"deterministic","value":0.0},
            "window":20.0,"dimension":2,"bogus":1}"#;
        assert!(serde_json::from_str::<ProcessSpec>(json).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let json = r#"{"type":"poisson","lambda_parent":-1.0,
            "grain_radius":{"law":"deterministic","value":0.0},
            "window":20.0,"dimension":2}"#;
        assert!(serde_json::from_str::<ProcessSpec>(json).is_err());
        let zero_mean = ProcessSpec::neyman_scott(
            1.0,
            ClusterSizeLaw::Deterministic { k: 0 },
            ClusterPointLaw::IsotropicGaussian { sigma: 1.0 },
            ScalarLaw::zero(),
            10.0,
            2,
        );
        assert!(matches!(
            zero_mean.validate(),
            Err(ModelError::ZeroMeanClusterSize)
        ));
    }

    #[test]
    fn torus_warning_triggers() {
        let wide = ProcessSpec::neyman_scott(
            0.05,
            ClusterSizeLaw::Poisson { mean: 2.0 },
            ClusterPointLaw::IsotropicGaussian { sigma: 2.0 },
            ScalarLaw::zero(),
            20.0,
            2,
        );
        assert!(!wide.torus_warnings(4.0).is_empty());
        let narrow = ProcessSpec::neyman_scott(
            0.05,
            ClusterSizeLaw::Poisson { mean: 2.0 },
            ClusterPointLaw::IsotropicGaussian { sigma: 0.5 },
            ScalarLaw::zero(),
            20.0,
            2,
        );
        assert!(narrow.torus_warnings(0.5).is_empty());
    }
}
