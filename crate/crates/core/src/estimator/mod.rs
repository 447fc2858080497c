//! Empirical estimation of the directed empty-space function, density and
//! hazard from simulated scenes.
//!
//! One scene is evaluated on a jittered query lattice; replications pool into
//! means with standard errors; hazards come from central differences of the
//! pooled distribution function divided by the pooled survival.

use crate::error::EstimatorError;
use crate::geometry::{DirectionSectors, GaugeBody, SceneIndex};
use crate::models::{sample_scene, GermGrainScene, ProcessSpec};
use crate::orderings::{CheckMethod, Ordered, OrderingVerdict, Witness};
use crate::rng::{replication_seed, stream_rng, JITTER_STREAM};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Survival fraction below which hazard values are masked as unreliable.
pub const MASK_THRESHOLD: f64 = 0.02;

/// Default statistical slack (in standard errors) for empirical order checks.
pub const DEFAULT_ORDER_SLACK: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Strictly increasing evaluation grid; may start at 0.
    pub t_grid: Vec<f64>,
    /// Query lattice resolution per axis.
    pub grid_resolution: usize,
    pub replications: usize,
    pub sectors: DirectionSectors,
    pub seed: u64,
}

impl EstimatorConfig {
    pub fn validate(&self, window: f64, dim: usize) -> Result<(), EstimatorError> {
        if self.t_grid.len() < 3 {
            return Err(EstimatorError::GridTooCoarse { min: 3 });
        }
        if self.t_grid[0] < 0.0 || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EstimatorError::ConfigInvalid(
                "t-grid must be nonnegative and strictly increasing".into(),
            ));
        }
        let tmax = *self.t_grid.last().unwrap();
        if tmax >= window / 4.0 {
            return Err(EstimatorError::TorusBound {
                tmax,
                bound: window / 4.0,
            });
        }
        if self.grid_resolution < 32 {
            return Err(EstimatorError::ConfigInvalid(
                "query grid resolution must be at least 32".into(),
            ));
        }
        if self.replications < 1 {
            return Err(EstimatorError::ConfigInvalid(
                "at least one replication required".into(),
            ));
        }
        self.sectors.validate(dim)?;
        Ok(())
    }

    pub fn fingerprint(&self) -> u64 {
        crate::util::fnv1a64(format!("{self:?}").as_bytes())
    }
}

/// Per-scene estimate of the directed empty-space function.
///
/// `per_sector[c][k]` is the fraction of query points with contact distance
/// at most `t_grid[k]` and contact direction in sector `c`; covered points
/// (distance zero) count toward `total` only.
#[derive(Debug, Clone)]
pub struct FTable {
    pub t_grid: Vec<f64>,
    pub total: Vec<f64>,
    pub per_sector: Vec<Vec<f64>>,
    pub covered_fraction: f64,
}

/// Evaluate one scene on a jittered query lattice.
pub fn estimate_f(
    scene: &GermGrainScene,
    gauge: &GaugeBody,
    config: &EstimatorConfig,
    jitter_seed: u64,
) -> Result<FTable, EstimatorError> {
    config.validate(scene.window, scene.dim)?;
    let mut jitter_rng = stream_rng(jitter_seed, JITTER_STREAM);
    let dim = scene.dim;
    let m = config.grid_resolution;
    let cell = scene.window / m as f64;
    let jitter: Vec<f64> = (0..dim).map(|_| jitter_rng.random_range(0.0..cell)).collect();
    Ok(estimate_f_jittered(scene, gauge, config, &jitter))
}

fn estimate_f_jittered(
    scene: &GermGrainScene,
    gauge: &GaugeBody,
    config: &EstimatorConfig,
    jitter: &[f64],
) -> FTable {
    let dim = scene.dim;
    let m = config.grid_resolution;
    let cell = scene.window / m as f64;
    let t_max = *config.t_grid.last().unwrap();
    let index = SceneIndex::build(scene, gauge, t_max);
    let n_sectors = config.sectors.count();
    let full_only = matches!(config.sectors, DirectionSectors::Full);

    let mut distances: Vec<Vec<f64>> = vec![Vec::new(); n_sectors];
    let mut covered = 0u64;
    let total_points = (m as u64).pow(dim as u32);

    let mut query = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    let mut dir = vec![0.0; dim];
    loop {
        for a in 0..dim {
            query[a] = idx[a] as f64 * cell + jitter[a];
        }
        let raw = index.contact(gauge, &query);
        if raw.distance == 0.0 {
            covered += 1;
        } else if raw.distance <= t_max {
            let sector = if full_only {
                0
            } else {
                let j = raw.grain as usize;
                let center = scene.germ(j);
                let mut c_eff = vec![0.0; dim];
                for a in 0..dim {
                    c_eff[a] =
                        query[a] + crate::util::wrap_delta(center[a] - query[a], scene.window);
                }
                crate::geometry::contact_direction_for(
                    gauge,
                    &query,
                    &c_eff,
                    scene.radii[j],
                    raw.distance,
                    &mut dir,
                );
                config.sectors.classify(&dir)
            };
            distances[sector].push(raw.distance);
        }
        // Advance the lattice index.
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == dim {
                return finish_table(config, distances, covered, total_points);
            }
        }
    }
}

fn finish_table(
    config: &EstimatorConfig,
    mut distances: Vec<Vec<f64>>,
    covered: u64,
    total_points: u64,
) -> FTable {
    let n = total_points as f64;
    let covered_fraction = covered as f64 / n;
    let mut per_sector = Vec::with_capacity(distances.len());
    let mut total = vec![covered_fraction; config.t_grid.len()];
    for list in distances.iter_mut() {
        list.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let col: Vec<f64> = config
            .t_grid
            .iter()
            .map(|&t| list.partition_point(|&d| d <= t) as f64 / n)
            .collect();
        for (tot, v) in total.iter_mut().zip(&col) {
            *tot += v;
        }
        per_sector.push(col);
    }
    FTable {
        t_grid: config.t_grid.clone(),
        total,
        per_sector,
        covered_fraction,
    }
}

/// Metadata identifying a pooled run.
#[derive(Debug, Clone, Serialize)]
pub struct CurveMeta {
    pub spec_fingerprint: u64,
    pub config_fingerprint: u64,
    pub seed: u64,
    pub replications: usize,
    /// Grid cells raised by the monotonicity clip before differencing.
    pub clip_events: usize,
}

/// Pooled empty-space function, density and hazard with standard errors.
///
/// Column 0 is the total (label "all", covered mass included); columns
/// `1..` are the direction sectors. Missing standard errors (single
/// replication) are NaN and serialize as `na`.
#[derive(Debug, Clone, Serialize)]
pub struct HazardCurve {
    pub t_grid: Vec<f64>,
    pub labels: Vec<String>,
    pub cdf: Vec<Vec<f64>>,
    pub cdf_se: Vec<Vec<f64>>,
    pub pdf: Vec<Vec<f64>>,
    pub hazard: Vec<Vec<f64>>,
    pub hazard_se: Vec<Vec<f64>>,
    pub masked: Vec<Vec<bool>>,
    /// Cross-check column: hazard from central differences of
    /// `-log(1 - F_total)`; total hazard only.
    pub log_hazard_check: Vec<f64>,
    pub meta: CurveMeta,
}

/// Simulate `replications` scenes and pool their empty-space estimates into
/// a hazard curve. Replication `r` runs on seed `config.seed ^ r`; pooling is
/// ordered by replication index regardless of scheduling.
pub fn pool_replications(
    spec: &ProcessSpec,
    gauge: &GaugeBody,
    config: &EstimatorConfig,
) -> Result<HazardCurve, EstimatorError> {
    spec.validate()?;
    config.validate(spec.window, spec.dimension)?;
    let tables: Vec<FTable> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = replication_seed(config.seed, rep);
            let scene = sample_scene(spec, seed).expect("validated spec");
            estimate_f(&scene, gauge, config, seed).expect("validated config")
        })
        .collect();

    let n_t = config.t_grid.len();
    let n_cols = config.sectors.count() + 1;
    let mut cdf = vec![vec![0.0; n_t]; n_cols];
    let mut cdf_se = vec![vec![f64::NAN; n_t]; n_cols];
    let mut buffer = Vec::with_capacity(tables.len());
    for col in 0..n_cols {
        for k in 0..n_t {
            buffer.clear();
            for table in &tables {
                let v = if col == 0 {
                    table.total[k]
                } else {
                    table.per_sector[col - 1][k]
                };
                buffer.push(v);
            }
            let (mean, se) = crate::util::mean_se(&buffer);
            cdf[col][k] = mean;
            cdf_se[col][k] = se.unwrap_or(f64::NAN);
        }
    }

    let meta = CurveMeta {
        spec_fingerprint: spec.fingerprint(),
        config_fingerprint: config.fingerprint(),
        seed: config.seed,
        replications: config.replications,
        clip_events: 0,
    };
    hazard_from_survival(&config.t_grid, &config.sectors, cdf, cdf_se, meta)
}

/// Turn pooled distribution columns into density and hazard columns.
///
/// Columns are clipped monotone (clip events counted), differenced centrally
/// (one-sided at the ends), and divided by the total survival; cells with
/// survival below [`MASK_THRESHOLD`] are masked, and exact zero survival uses
/// the `a/0 := 0` sentinel.
pub fn hazard_from_survival(
    t_grid: &[f64],
    sectors: &DirectionSectors,
    mut cdf: Vec<Vec<f64>>,
    cdf_se: Vec<Vec<f64>>,
    mut meta: CurveMeta,
) -> Result<HazardCurve, EstimatorError> {
    let n_t = t_grid.len();
    if n_t < 3 {
        return Err(EstimatorError::GridTooCoarse { min: 3 });
    }
    let mut clip_events = 0usize;
    for col in cdf.iter_mut() {
        let mut run_max = 0.0f64;
        for v in col.iter_mut() {
            if *v < run_max {
                *v = run_max;
                clip_events += 1;
            } else {
                run_max = *v;
            }
        }
    }
    meta.clip_events = clip_events;

    let diff = |col: &[f64], k: usize| -> (f64, f64) {
        let (lo, hi) = if k == 0 {
            (0, 1)
        } else if k == n_t - 1 {
            (n_t - 2, n_t - 1)
        } else {
            (k - 1, k + 1)
        };
        ((col[hi] - col[lo]), t_grid[hi] - t_grid[lo])
    };

    let n_cols = cdf.len();
    let mut pdf = vec![vec![0.0; n_t]; n_cols];
    let mut hazard = vec![vec![0.0; n_t]; n_cols];
    let mut hazard_se = vec![vec![0.0; n_t]; n_cols];
    let mut masked = vec![vec![false; n_t]; n_cols];
    let total = cdf[0].clone();
    for col in 0..n_cols {
        for k in 0..n_t {
            let (df, dt) = diff(&cdf[col], k);
            pdf[col][k] = df / dt;
            let survival = 1.0 - total[k];
            if survival <= 0.0 {
                hazard[col][k] = 0.0; // a/0 := 0
                masked[col][k] = true;
                continue;
            }
            hazard[col][k] = pdf[col][k] / survival;
            if survival < MASK_THRESHOLD {
                masked[col][k] = true;
            }
            let (lo, hi) = if k == 0 {
                (0, 1)
            } else if k == n_t - 1 {
                (n_t - 2, n_t - 1)
            } else {
                (k - 1, k + 1)
            };
            let se_lo = cdf_se[col][lo];
            let se_hi = cdf_se[col][hi];
            if se_lo.is_finite() && se_hi.is_finite() {
                let pdf_se = (se_lo * se_lo + se_hi * se_hi).sqrt() / dt;
                hazard_se[col][k] = pdf_se / survival;
            } else {
                hazard_se[col][k] = f64::NAN;
            }
        }
    }

    let log_hazard_check = (0..n_t)
        .map(|k| {
            let (lo, hi) = if k == 0 {
                (0, 1)
            } else if k == n_t - 1 {
                (n_t - 2, n_t - 1)
            } else {
                (k - 1, k + 1)
            };
            let (s_lo, s_hi) = (1.0 - total[lo], 1.0 - total[hi]);
            if s_lo > 0.0 && s_hi > 0.0 {
                (s_lo.ln() - s_hi.ln()) / (t_grid[hi] - t_grid[lo])
            } else {
                f64::NAN
            }
        })
        .collect();

    Ok(HazardCurve {
        t_grid: t_grid.to_vec(),
        labels: sectors.labels(),
        cdf,
        cdf_se,
        pdf,
        hazard,
        hazard_se,
        masked,
        log_hazard_check,
        meta,
    })
}

/// Borrowed hazard columns, the common currency of order checks between
/// empirical and analytic curves.
#[derive(Debug, Clone, Copy)]
pub struct HazardTable<'a> {
    pub t_grid: &'a [f64],
    pub labels: &'a [String],
    pub hazard: &'a [Vec<f64>],
    pub hazard_se: &'a [Vec<f64>],
    pub masked: &'a [Vec<bool>],
}

impl HazardCurve {
    pub fn table(&self) -> HazardTable<'_> {
        HazardTable {
            t_grid: &self.t_grid,
            labels: &self.labels,
            hazard: &self.hazard,
            hazard_se: &self.hazard_se,
            masked: &self.masked,
        }
    }

    /// Fixed-schema CSV: `t,sector_id,F,F_se,f,r,r_se,masked`, rows ordered
    /// t-major then sector (total first).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,sector_id,F,F_se,f,r,r_se,masked")?;
        for k in 0..self.t_grid.len() {
            for col in 0..self.labels.len() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    fmt(self.t_grid[k]),
                    self.labels[col],
                    fmt(self.cdf[col][k]),
                    fmt(self.cdf_se[col][k]),
                    fmt(self.pdf[col][k]),
                    fmt(self.hazard[col][k]),
                    fmt(self.hazard_se[col][k]),
                    self.masked[col][k] as u8
                )?;
            }
        }
        Ok(())
    }
}

pub(crate) fn fmt(v: f64) -> String {
    if v.is_nan() {
        "na".to_string()
    } else {
        format!("{v:.10e}")
    }
}

/// Pointwise hazard dominance `r_a >= r_b - slack * (se_a + se_b)` over all
/// unmasked cells of two curves on identical grids and sectors.
pub fn empirical_hazard_order(
    a: &HazardTable,
    b: &HazardTable,
    slack: f64,
) -> Result<OrderingVerdict, EstimatorError> {
    if a.t_grid.len() != b.t_grid.len()
        || a.t_grid
            .iter()
            .zip(b.t_grid)
            .any(|(x, y)| (x - y).abs() > 1e-12)
    {
        return Err(EstimatorError::CurveMismatch("t-grids differ".into()));
    }
    if a.labels != b.labels {
        return Err(EstimatorError::CurveMismatch("sector labels differ".into()));
    }
    let mut worst_decision = f64::INFINITY;
    let mut worst_margin = f64::NAN;
    let mut witness: Option<Witness> = None;
    let mut tested = 0usize;
    for col in 0..a.labels.len() {
        for k in 0..a.t_grid.len() {
            if a.masked[col][k] || b.masked[col][k] {
                continue;
            }
            tested += 1;
            let se_a = if a.hazard_se[col][k].is_finite() {
                a.hazard_se[col][k]
            } else {
                0.0
            };
            let se_b = if b.hazard_se[col][k].is_finite() {
                b.hazard_se[col][k]
            } else {
                0.0
            };
            let diff = a.hazard[col][k] - b.hazard[col][k];
            let decision = diff + slack * (se_a + se_b);
            if decision < worst_decision {
                worst_decision = decision;
                worst_margin = diff;
                witness = Some(Witness {
                    location: a.t_grid[k],
                    sector: Some(a.labels[col].clone()),
                    value_a: a.hazard[col][k],
                    value_b: b.hazard[col][k],
                });
            }
        }
    }
    if tested == 0 {
        return Ok(OrderingVerdict {
            ordered: Ordered::Undetermined,
            worst_margin: f64::NAN,
            witness: None,
            method: CheckMethod::Empirical,
        });
    }
    let ordered = worst_decision >= 0.0;
    Ok(OrderingVerdict {
        ordered: if ordered { Ordered::Yes } else { Ordered::No },
        worst_margin,
        witness: if ordered { None } else { witness },
        method: CheckMethod::Empirical,
    })
}
