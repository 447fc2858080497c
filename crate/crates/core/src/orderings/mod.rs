//! Analytic stochastic-order checkers.
//!
//! Two orders drive the hazard comparisons: the length-biased generating
//! function order on counting variables (normalized pgf-derivative dominance
//! on [0, 1]) and the first-cumulant order on nonnegative intensities
//! (Laplace-ratio dominance on s >= 0). Both are variability orders at fixed
//! mean: the larger law has the larger variance.

use crate::error::OrderingError;
use crate::models::{ClusterSizeLaw, IntensityLaw, ScalarLaw};
use rand::Rng;
use rand_distr::Distribution;
use serde::Serialize;

const GRID_TOL: f64 = 1e-10;
const TABLE_CUTOFF: f64 = 1e-12;

/// Counting-variable law: the cluster-size variants plus explicit finite
/// support tables.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(try_from = "RawCountingLaw", into = "RawCountingLaw")]
pub enum CountingLaw {
    Deterministic(u32),
    Poisson(f64),
    Binomial { n: u32, p: f64 },
    /// `P(k) = C(k + r - 1, k) p^r (1 - p)^k`.
    NegativeBinomial { p: f64, r: f64 },
    GaussPoissonSize { p: f64 },
    Compound(Box<CountingLaw>, Box<CountingLaw>),
    /// `probs[k] = P(eta = k)`.
    Table(Vec<f64>),
}

/// Serialized form of [`CountingLaw`] with the same `law`-tagged vocabulary
/// as the model laws.
#[derive(Serialize, serde::Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
enum RawCountingLaw {
    Deterministic {
        k: u32,
    },
    Poisson {
        mean: f64,
    },
    Binomial {
        n: u32,
        p: f64,
    },
    NegativeBinomial {
        p: f64,
        r: f64,
    },
    GaussPoissonSize {
        p: f64,
    },
    Compound {
        outer: Box<RawCountingLaw>,
        inner: Box<RawCountingLaw>,
    },
    Table {
        probs: Vec<f64>,
    },
}

impl From<CountingLaw> for RawCountingLaw {
    fn from(law: CountingLaw) -> RawCountingLaw {
        match law {
            CountingLaw::Deterministic(k) => RawCountingLaw::Deterministic { k },
            CountingLaw::Poisson(mean) => RawCountingLaw::Poisson { mean },
            CountingLaw::Binomial { n, p } => RawCountingLaw::Binomial { n, p },
            CountingLaw::NegativeBinomial { p, r } => RawCountingLaw::NegativeBinomial { p, r },
            CountingLaw::GaussPoissonSize { p } => RawCountingLaw::GaussPoissonSize { p },
            CountingLaw::Compound(outer, inner) => RawCountingLaw::Compound {
                outer: Box::new((*outer).into()),
                inner: Box::new((*inner).into()),
            },
            CountingLaw::Table(probs) => RawCountingLaw::Table { probs },
        }
    }
}

impl TryFrom<RawCountingLaw> for CountingLaw {
    type Error = OrderingError;
    fn try_from(raw: RawCountingLaw) -> Result<CountingLaw, OrderingError> {
        Ok(match raw {
            RawCountingLaw::Deterministic { k } => CountingLaw::Deterministic(k),
            RawCountingLaw::Poisson { mean } => {
                if !(mean >= 0.0) {
                    return Err(OrderingError::InvalidLaw("negative Poisson mean".into()));
                }
                CountingLaw::Poisson(mean)
            }
            RawCountingLaw::Binomial { n, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(OrderingError::InvalidLaw("binomial p outside [0,1]".into()));
                }
                CountingLaw::Binomial { n, p }
            }
            RawCountingLaw::NegativeBinomial { p, r } => {
                if !(p > 0.0 && p <= 1.0 && r > 0.0) {
                    return Err(OrderingError::InvalidLaw(
                        "negative binomial parameters out of range".into(),
                    ));
                }
                CountingLaw::NegativeBinomial { p, r }
            }
            RawCountingLaw::GaussPoissonSize { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(OrderingError::InvalidLaw(
                        "secondary probability outside [0,1]".into(),
                    ));
                }
                CountingLaw::GaussPoissonSize { p }
            }
            RawCountingLaw::Compound { outer, inner } => CountingLaw::Compound(
                Box::new((*outer).try_into()?),
                Box::new((*inner).try_into()?),
            ),
            RawCountingLaw::Table { probs } => CountingLaw::table(probs)?,
        })
    }
}

impl From<&ClusterSizeLaw> for CountingLaw {
    fn from(law: &ClusterSizeLaw) -> Self {
        match law {
            ClusterSizeLaw::Deterministic { k } => CountingLaw::Deterministic(*k),
            ClusterSizeLaw::Poisson { mean } => CountingLaw::Poisson(*mean),
            ClusterSizeLaw::Binomial { n, p } => CountingLaw::Binomial { n: *n, p: *p },
            ClusterSizeLaw::NegativeBinomial { p, r } => {
                CountingLaw::NegativeBinomial { p: *p, r: *r }
            }
            ClusterSizeLaw::GaussPoissonSize { p } => CountingLaw::GaussPoissonSize { p: *p },
            ClusterSizeLaw::Compound { outer, inner } => CountingLaw::Compound(
                Box::new(CountingLaw::from(outer.as_ref())),
                Box::new(CountingLaw::from(inner.as_ref())),
            ),
        }
    }
}

impl CountingLaw {
    /// Explicit table law; probabilities must sum to one within 1e-12.
    pub fn table(probs: Vec<f64>) -> Result<Self, OrderingError> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(OrderingError::InvalidLaw(
                "table probabilities must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(OrderingError::InvalidLaw(format!(
                "table probabilities sum to {total}, not 1"
            )));
        }
        Ok(CountingLaw::Table(probs))
    }

    fn check_s(s: f64) -> Result<(), OrderingError> {
        if (0.0..=1.0).contains(&s) {
            Ok(())
        } else {
            Err(OrderingError::OutOfDomain {
                value: s,
                domain: "[0, 1]",
            })
        }
    }

    /// Probability generating function `E[s^eta]` on `[0, 1]`.
    pub fn pgf(&self, s: f64) -> Result<f64, OrderingError> {
        Self::check_s(s)?;
        Ok(self.pgf_unchecked(s))
    }

    fn pgf_unchecked(&self, s: f64) -> f64 {
        match self {
            CountingLaw::Deterministic(k) => s.powi(*k as i32),
            CountingLaw::Poisson(c) => (-c * (1.0 - s)).exp(),
            CountingLaw::Binomial { n, p } => ((1.0 - p) + p * s).powi(*n as i32),
            CountingLaw::NegativeBinomial { p, r } => (p / (1.0 - (1.0 - p) * s)).powf(*r),
            CountingLaw::GaussPoissonSize { p } => (1.0 - p) * s + p * s * s,
            CountingLaw::Compound(outer, inner) => {
                outer.pgf_unchecked(inner.pgf_unchecked(s))
            }
            CountingLaw::Table(probs) => probs
                .iter()
                .enumerate()
                .map(|(k, p)| p * s.powi(k as i32))
                .sum(),
        }
    }

    /// Derivative of the probability generating function.
    pub fn pgf_derivative(&self, s: f64) -> Result<f64, OrderingError> {
        Self::check_s(s)?;
        Ok(self.pgf_derivative_unchecked(s))
    }

    fn pgf_derivative_unchecked(&self, s: f64) -> f64 {
        match self {
            CountingLaw::Deterministic(k) => {
                if *k == 0 {
                    0.0
                } else {
                    *k as f64 * s.powi(*k as i32 - 1)
                }
            }
            CountingLaw::Poisson(c) => c * (-c * (1.0 - s)).exp(),
            CountingLaw::Binomial { n, p } => {
                if *n == 0 {
                    0.0
                } else {
                    *n as f64 * p * ((1.0 - p) + p * s).powi(*n as i32 - 1)
                }
            }
            CountingLaw::NegativeBinomial { p, r } => {
                r * (1.0 - p) * p.powf(*r) / (1.0 - (1.0 - p) * s).powf(r + 1.0)
            }
            CountingLaw::GaussPoissonSize { p } => (1.0 - p) + 2.0 * p * s,
            CountingLaw::Compound(outer, inner) => {
                outer.pgf_derivative_unchecked(inner.pgf_unchecked(s))
                    * inner.pgf_derivative_unchecked(s)
            }
            CountingLaw::Table(probs) => probs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, p)| k as f64 * p * s.powi(k as i32 - 1))
                .sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            CountingLaw::Deterministic(k) => *k as f64,
            CountingLaw::Poisson(c) => *c,
            CountingLaw::Binomial { n, p } => *n as f64 * p,
            CountingLaw::NegativeBinomial { p, r } => r * (1.0 - p) / p,
            CountingLaw::GaussPoissonSize { p } => 1.0 + p,
            CountingLaw::Compound(outer, inner) => outer.mean() * inner.mean(),
            CountingLaw::Table(probs) => probs
                .iter()
                .enumerate()
                .map(|(k, p)| k as f64 * p)
                .sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            CountingLaw::Deterministic(_) => 0.0,
            CountingLaw::Poisson(c) => *c,
            CountingLaw::Binomial { n, p } => *n as f64 * p * (1.0 - p),
            CountingLaw::NegativeBinomial { p, r } => r * (1.0 - p) / (p * p),
            CountingLaw::GaussPoissonSize { p } => p * (1.0 - p),
            CountingLaw::Compound(outer, inner) => {
                outer.mean() * inner.variance() + outer.variance() * inner.mean().powi(2)
            }
            CountingLaw::Table(probs) => {
                let m = self.mean();
                probs
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p * (k as f64 - m).powi(2))
                    .sum()
            }
        }
    }

    pub fn prob_zero(&self) -> f64 {
        self.pgf_unchecked(0.0)
    }

    /// Dense probability table truncated once the remaining mass drops below
    /// the cutoff, renormalized.
    pub fn to_table(&self) -> Vec<f64> {
        let mut probs = match self {
            CountingLaw::Deterministic(k) => {
                let mut v = vec![0.0; *k as usize + 1];
                v[*k as usize] = 1.0;
                v
            }
            CountingLaw::Poisson(c) => {
                let mut v = Vec::new();
                let mut pk = (-c).exp();
                let mut acc = 0.0;
                let mut k = 0usize;
                while acc < 1.0 - TABLE_CUTOFF && k < 10_000 {
                    v.push(pk);
                    acc += pk;
                    pk *= c / (k + 1) as f64;
                    k += 1;
                }
                v
            }
            CountingLaw::Binomial { n, p } => {
                let n = *n as usize;
                let mut v = vec![0.0; n + 1];
                let mut pk = (1.0 - p).powi(n as i32);
                for k in 0..=n {
                    v[k] = pk;
                    if k < n {
                        pk *= (n - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
                    }
                }
                v
            }
            CountingLaw::NegativeBinomial { p, r } => {
                let mut v = Vec::new();
                let mut pk = p.powf(*r);
                let mut acc = 0.0;
                let mut k = 0usize;
                while acc < 1.0 - TABLE_CUTOFF && k < 100_000 {
                    v.push(pk);
                    acc += pk;
                    pk *= (1.0 - p) * (k as f64 + r) / (k + 1) as f64;
                    k += 1;
                }
                v
            }
            CountingLaw::GaussPoissonSize { p } => vec![0.0, 1.0 - p, *p],
            CountingLaw::Compound(outer, inner) => {
                let outer_t = outer.to_table();
                let inner_t = inner.to_table();
                let mut acc = vec![0.0];
                let mut power = vec![1.0]; // inner^{*k}, starting at k = 0
                for (k, &pk) in outer_t.iter().enumerate() {
                    if k > 0 {
                        power = convolve(&power, &inner_t);
                    }
                    if pk > 0.0 {
                        if power.len() > acc.len() {
                            acc.resize(power.len(), 0.0);
                        }
                        for (a, &q) in acc.iter_mut().zip(&power) {
                            *a += pk * q;
                        }
                    }
                }
                acc
            }
            CountingLaw::Table(probs) => probs.clone(),
        };
        let total: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= total;
        }
        probs
    }

    /// The shifted length-biased law, `P(eta_l = k) = (k+1) P(eta = k+1) / E[eta]`.
    ///
    /// Poisson is a fixed point; negative binomial maps `(p, r)` to
    /// `(p, r + 1)`; all other variants go through a truncated table.
    pub fn length_biased(&self) -> Result<CountingLaw, OrderingError> {
        let mean = self.mean();
        if !(mean > 0.0) {
            return Err(OrderingError::ZeroMean);
        }
        Ok(match self {
            CountingLaw::Poisson(c) => CountingLaw::Poisson(*c),
            CountingLaw::NegativeBinomial { p, r } => {
                CountingLaw::NegativeBinomial { p: *p, r: r + 1.0 }
            }
            other => {
                let table = other.to_table();
                let mut biased: Vec<f64> = table
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, p)| k as f64 * p)
                    .collect();
                let total: f64 = biased.iter().sum();
                for b in biased.iter_mut() {
                    *b /= total;
                }
                if biased.is_empty() {
                    biased.push(1.0);
                }
                CountingLaw::Table(biased)
            }
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        match self {
            CountingLaw::Deterministic(k) => *k,
            CountingLaw::Poisson(c) => crate::models::sample_poisson_count(*c, rng),
            CountingLaw::Binomial { n, p } => rand_distr::Binomial::new(*n as u64, *p)
                .expect("validated")
                .sample(rng) as u32,
            CountingLaw::NegativeBinomial { p, r } => {
                if *p >= 1.0 {
                    return 0;
                }
                let lam = rand_distr::Gamma::new(*r, (1.0 - p) / p)
                    .expect("validated")
                    .sample(rng);
                crate::models::sample_poisson_count(lam, rng)
            }
            CountingLaw::GaussPoissonSize { p } => {
                if rng.random::<f64>() < *p {
                    2
                } else {
                    1
                }
            }
            CountingLaw::Compound(outer, inner) => {
                let n = outer.sample(rng);
                (0..n).map(|_| inner.sample(rng)).sum()
            }
            CountingLaw::Table(probs) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u32;
                    }
                }
                probs.len() as u32 - 1
            }
        }
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordered {
    Yes,
    No,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    /// Verdict from a recognized closed-form condition.
    ClosedForm,
    /// Verdict from evaluation on a finite grid. A `yes` holds on the tested
    /// range only.
    GridCheck,
    /// Verdict from Monte Carlo curves with statistical slack.
    Empirical,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub location: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<String>,
    pub value_a: f64,
    pub value_b: f64,
}

/// Outcome of an order check. `No` is only reported with a witness of a
/// strict violation beyond tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingVerdict {
    pub ordered: Ordered,
    /// Minimum of the dominance margin over the tested locations.
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub method: CheckMethod,
}

struct Scan {
    min_margin: f64,
    at: f64,
    value_a: f64,
    value_b: f64,
}

fn scan_margin(mut f: impl FnMut(f64) -> (f64, f64), grid: &[f64]) -> Scan {
    let mut scan = Scan {
        min_margin: f64::INFINITY,
        at: grid[0],
        value_a: 0.0,
        value_b: 0.0,
    };
    for &s in grid {
        let (a, b) = f(s);
        let margin = a - b;
        if margin < scan.min_margin {
            scan = Scan {
                min_margin: margin,
                at: s,
                value_a: a,
                value_b: b,
            };
        }
    }
    scan
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Check the length-biased generating-function order `a < b`: normalized
/// pgf derivatives satisfy `g_a'(s)/E[a] >= g_b'(s)/E[b]` on `[0, 1]`.
///
/// Recognized families (Poisson pairs, same-size binomial pairs, negative
/// binomial pairs, laws whose length-biased version is identically zero) get
/// closed-form verdicts; everything else is a grid check.
pub fn lg_order_check(
    a: &CountingLaw,
    b: &CountingLaw,
    grid_size: usize,
) -> Result<OrderingVerdict, OrderingError> {
    let ma = a.mean();
    let mb = b.mean();
    if !(ma > 0.0) || !(mb > 0.0) {
        return Err(OrderingError::ZeroMean);
    }
    let grid = uniform_grid(0.0, 1.0, grid_size.max(3));
    let scan = scan_margin(
        |s| {
            (
                a.pgf_derivative_unchecked(s) / ma,
                b.pgf_derivative_unchecked(s) / mb,
            )
        },
        &grid,
    );
    let closed = lg_closed_form(a, b, ma);
    finish_verdict(scan, closed)
}

fn lg_closed_form(a: &CountingLaw, b: &CountingLaw, mean_a: f64) -> Option<bool> {
    // A law whose normalized derivative is identically one is maximal.
    if a.pgf_derivative_unchecked(0.0) / mean_a >= 1.0 - 1e-12 {
        return Some(true);
    }
    match (a, b) {
        (CountingLaw::Poisson(c), CountingLaw::Poisson(ct)) => Some(c <= ct),
        (CountingLaw::Binomial { n, p }, CountingLaw::Binomial { n: nt, p: pt })
            if n == nt =>
        {
            Some(*n <= 1 || p <= pt)
        }
        (
            CountingLaw::NegativeBinomial { p, r },
            CountingLaw::NegativeBinomial { p: pt, r: rt },
        ) => {
            if p >= pt && r <= rt {
                Some(true)
            } else if p == pt {
                Some(r <= rt)
            } else if r == rt {
                Some(p >= pt)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn finish_verdict(scan: Scan, closed: Option<bool>) -> Result<OrderingVerdict, OrderingError> {
    let witness = Witness {
        location: scan.at,
        sector: None,
        value_a: scan.value_a,
        value_b: scan.value_b,
    };
    Ok(match closed {
        Some(true) => OrderingVerdict {
            ordered: Ordered::Yes,
            worst_margin: scan.min_margin,
            witness: None,
            method: CheckMethod::ClosedForm,
        },
        Some(false) => OrderingVerdict {
            ordered: Ordered::No,
            worst_margin: scan.min_margin,
            witness: Some(witness),
            method: CheckMethod::ClosedForm,
        },
        None => {
            if scan.min_margin >= -GRID_TOL {
                OrderingVerdict {
                    ordered: Ordered::Yes,
                    worst_margin: scan.min_margin,
                    witness: None,
                    method: CheckMethod::GridCheck,
                }
            } else {
                OrderingVerdict {
                    ordered: Ordered::No,
                    worst_margin: scan.min_margin,
                    witness: Some(witness),
                    method: CheckMethod::GridCheck,
                }
            }
        }
    })
}

/// Laplace transform `E[e^{-s Lambda}]`, `s >= 0`.
pub fn laplace(law: &IntensityLaw, s: f64) -> f64 {
    law.laplace(s)
}

/// `E[Lambda e^{-s Lambda}] / E[e^{-s Lambda}]`, `s >= 0`.
pub fn laplace_ratio(law: &IntensityLaw, s: f64) -> f64 {
    law.laplace_ratio(s)
}

/// Check the first-cumulant order `a < b`: Laplace ratios satisfy
/// `ratio_a(s) >= ratio_b(s)` for `s >= 0`.
///
/// Gamma pairs use the shape/mean condition; degenerate laws compare against
/// the other side's mean or essential infimum. Grid verdicts hold on the
/// tested range `[0, s_max]` only.
pub fn cum_order_check(
    a: &IntensityLaw,
    b: &IntensityLaw,
    s_max: f64,
    grid_size: usize,
) -> Result<OrderingVerdict, OrderingError> {
    if !(s_max > 0.0) {
        return Err(OrderingError::OutOfDomain {
            value: s_max,
            domain: "(0, inf)",
        });
    }
    let grid = uniform_grid(0.0, s_max, grid_size.max(3));
    let scan = scan_margin(|s| (a.laplace_ratio(s), b.laplace_ratio(s)), &grid);
    let closed = cum_closed_form(a, b);
    finish_verdict(scan, closed)
}

fn essential_infimum(law: &IntensityLaw) -> f64 {
    match law {
        IntensityLaw::Degenerate { value } => *value,
        IntensityLaw::Gamma { .. } => 0.0,
        IntensityLaw::TwoPoint { lo, hi, q } => {
            if *q > 0.0 {
                *lo
            } else {
                *hi
            }
        }
    }
}

fn cum_closed_form(a: &IntensityLaw, b: &IntensityLaw) -> Option<bool> {
    match (a, b) {
        (
            IntensityLaw::Gamma { shape, rate },
            IntensityLaw::Gamma { shape: st, rate: rt },
        ) => Some(shape >= st && shape / rate >= st / rt),
        // ratio_b is nonincreasing from E[b]; a constant dominates iff it
        // dominates at s = 0.
        (IntensityLaw::Degenerate { value }, _) => Some(*value >= b.mean()),
        // ratio_a decreases to the essential infimum of a.
        (_, IntensityLaw::Degenerate { value }) => Some(essential_infimum(a) >= *value),
        _ => None,
    }
}

/// Report on the variability consequence of an order at equal means: the
/// smaller law must have the smaller variance.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceReport {
    pub applicable: bool,
    pub ordered: Ordered,
    pub var_a: f64,
    pub var_b: f64,
    pub consistent: bool,
}

pub fn variance_consistency_counting(
    a: &CountingLaw,
    b: &CountingLaw,
    grid_size: usize,
) -> Result<VarianceReport, OrderingError> {
    let applicable = (a.mean() - b.mean()).abs() <= 1e-9;
    let (var_a, var_b) = (a.variance(), b.variance());
    if !applicable {
        return Ok(VarianceReport {
            applicable,
            ordered: Ordered::Undetermined,
            var_a,
            var_b,
            consistent: true,
        });
    }
    let verdict = lg_order_check(a, b, grid_size)?;
    let consistent = verdict.ordered != Ordered::Yes || var_a <= var_b + 1e-9;
    Ok(VarianceReport {
        applicable,
        ordered: verdict.ordered,
        var_a,
        var_b,
        consistent,
    })
}

pub fn variance_consistency_intensity(
    a: &IntensityLaw,
    b: &IntensityLaw,
    s_max: f64,
    grid_size: usize,
) -> Result<VarianceReport, OrderingError> {
    let applicable = (a.mean() - b.mean()).abs() <= 1e-9;
    let (var_a, var_b) = (a.variance(), b.variance());
    if !applicable {
        return Ok(VarianceReport {
            applicable,
            ordered: Ordered::Undetermined,
            var_a,
            var_b,
            consistent: true,
        });
    }
    let verdict = cum_order_check(a, b, s_max, grid_size)?;
    let consistent = verdict.ordered != Ordered::Yes || var_a <= var_b + 1e-9;
    Ok(VarianceReport {
        applicable,
        ordered: verdict.ordered,
        var_a,
        var_b,
        consistent,
    })
}

/// Check whether `w_small` is stochastically smaller than `w_large`:
/// `P(w_small > t) <= P(w_large > t)` for all `t >= 0`.
pub fn stochastic_scaling_order(w_large: &ScalarLaw, w_small: &ScalarLaw) -> OrderingVerdict {
    let hi = w_large.upper_bound().max(w_small.upper_bound()) * 1.05 + 1e-9;
    let mut grid = uniform_grid(0.0, hi, 2001);
    // Survival functions jump at atoms; test just below and above each.
    for law in [w_large, w_small] {
        match law {
            ScalarLaw::Deterministic { value } => {
                grid.push((value - 1e-12).max(0.0));
                grid.push(value + 1e-12);
            }
            ScalarLaw::TwoPoint { lo, hi, .. } => {
                for v in [lo, hi] {
                    grid.push((v - 1e-12).max(0.0));
                    grid.push(v + 1e-12);
                }
            }
            ScalarLaw::Uniform { .. } => {}
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scan = scan_margin(|t| (w_large.survival(t), w_small.survival(t)), &grid);
    if scan.min_margin >= -GRID_TOL {
        OrderingVerdict {
            ordered: Ordered::Yes,
            worst_margin: scan.min_margin,
            witness: None,
            method: CheckMethod::GridCheck,
        }
    } else {
        OrderingVerdict {
            ordered: Ordered::No,
            worst_margin: scan.min_margin,
            witness: Some(Witness {
                location: scan.at,
                sector: None,
                value_a: scan.value_a,
                value_b: scan.value_b,
            }),
            method: CheckMethod::GridCheck,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgf_values() {
        let p = CountingLaw::Poisson(2.0);
        assert!((p.pgf(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((p.pgf_derivative(1.0).unwrap() - 2.0).abs() < 1e-14);
        let d1 = CountingLaw::Deterministic(1);
        assert!((d1.pgf(0.3).unwrap() - 0.3).abs() < 1e-14);
        assert!((d1.pgf_derivative(0.7).unwrap() - 1.0).abs() < 1e-14);
        let b = CountingLaw::Binomial { n: 3, p: 0.2 };
        assert!((b.pgf(0.0).unwrap() - 0.512).abs() < 1e-14);
        assert!(b.pgf(1.5).is_err());
    }

    #[test]
    fn pgf_derivative_matches_central_differences() {
        let laws = [
            CountingLaw::Poisson(1.7),
            CountingLaw::Binomial { n: 5, p: 0.3 },
            CountingLaw::NegativeBinomial { p: 0.4, r: 2.5 },
            CountingLaw::GaussPoissonSize { p: 0.6 },
            CountingLaw::Compound(
                Box::new(CountingLaw::Poisson(1.2)),
                Box::new(CountingLaw::Deterministic(2)),
            ),
            CountingLaw::table(vec![0.2, 0.3, 0.5]).unwrap(),
        ];
        for law in &laws {
            for s in [0.1, 0.35, 0.5, 0.9] {
                let h = 1e-5;
                let num = (law.pgf(s + h).unwrap() - law.pgf(s - h).unwrap()) / (2.0 * h);
                let ana = law.pgf_derivative(s).unwrap();
                assert!(
                    (num - ana).abs() <= 1e-7 * ana.abs().max(1.0),
                    "{law:?} at {s}: {num} vs {ana}"
                );
            }
        }
    }

    #[test]
    fn mean_derivative_at_one() {
        let laws = [
            CountingLaw::Poisson(2.3),
            CountingLaw::NegativeBinomial { p: 0.3, r: 1.5 },
            CountingLaw::Compound(
                Box::new(CountingLaw::Binomial { n: 4, p: 0.5 }),
                Box::new(CountingLaw::Poisson(0.7)),
            ),
        ];
        for law in &laws {
            assert!((law.pgf_derivative(1.0).unwrap() - law.mean()).abs() < 1e-10);
        }
    }

    #[test]
    fn length_biased_closed_forms() {
        assert_eq!(
            CountingLaw::Poisson(2.0).length_biased().unwrap(),
            CountingLaw::Poisson(2.0)
        );
        assert_eq!(
            CountingLaw::NegativeBinomial { p: 0.3, r: 2.0 }
                .length_biased()
                .unwrap(),
            CountingLaw::NegativeBinomial { p: 0.3, r: 3.0 }
        );
        // eta identically 1 biases to identically 0.
        let biased = CountingLaw::Deterministic(1).length_biased().unwrap();
        assert!((biased.prob_zero() - 1.0).abs() < 1e-12);
        assert!(CountingLaw::Deterministic(0).length_biased().is_err());
    }

    #[test]
    fn length_biased_table_mass_and_mean() {
        // Mean of eta_l is E[eta(eta-1)] / E[eta].
        let law = CountingLaw::table(vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let biased = law.length_biased().unwrap();
        let table = biased.to_table();
        assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let e2: f64 = [0.1, 0.4, 0.3, 0.2]
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k) as f64 * p)
            .sum();
        let expected = (e2 - law.mean()) / law.mean();
        assert!((biased.mean() - expected).abs() < 1e-12);
    }

    #[test]
    fn binomial_length_biased_is_shifted_binomial() {
        let biased = CountingLaw::Binomial { n: 4, p: 0.3 }.length_biased().unwrap();
        let expected = CountingLaw::Binomial { n: 3, p: 0.3 }.to_table();
        let got = biased.to_table();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn compound_table_matches_moments() {
        let comp = CountingLaw::Compound(
            Box::new(CountingLaw::Poisson(1.5)),
            Box::new(CountingLaw::table(vec![0.0, 0.5, 0.5]).unwrap()),
        );
        let table = CountingLaw::Table(comp.to_table());
        assert!((table.mean() - comp.mean()).abs() < 1e-9);
        assert!((table.variance() - comp.variance()).abs() < 1e-8);
    }

    #[test]
    fn lg_poisson_iff() {
        let v = lg_order_check(&CountingLaw::Poisson(1.0), &CountingLaw::Poisson(2.0), 101)
            .unwrap();
        assert_eq!(v.ordered, Ordered::Yes);
        assert_eq!(v.method, CheckMethod::ClosedForm);
        let v = lg_order_check(&CountingLaw::Poisson(2.0), &CountingLaw::Poisson(1.0), 101)
            .unwrap();
        assert_eq!(v.ordered, Ordered::No);
        assert!(v.witness.is_some());
    }

    #[test]
    fn lg_deterministic_one_is_minimal() {
        for other in [
            CountingLaw::Poisson(3.0),
            CountingLaw::Binomial { n: 5, p: 0.5 },
            CountingLaw::table(vec![0.0, 0.0, 1.0]).unwrap(),
        ] {
            let v = lg_order_check(&CountingLaw::Deterministic(1), &other, 101).unwrap();
            assert_eq!(v.ordered, Ordered::Yes, "vs {other:?}");
        }
    }

    #[test]
    fn lg_binomial_witness_at_zero() {
        let v = lg_order_check(
            &CountingLaw::Binomial { n: 3, p: 0.5 },
            &CountingLaw::Binomial { n: 3, p: 0.2 },
            101,
        )
        .unwrap();
        assert_eq!(v.ordered, Ordered::No);
        let w = v.witness.unwrap();
        assert_eq!(w.location, 0.0);
        assert!((w.value_a - 0.25).abs() < 1e-12);
        assert!((w.value_b - 0.64).abs() < 1e-12);
    }

    #[test]
    fn lg_reflexive_margin_zero() {
        let law = CountingLaw::NegativeBinomial { p: 0.4, r: 2.0 };
        let v = lg_order_check(&law, &law, 101).unwrap();
        assert_eq!(v.ordered, Ordered::Yes);
        assert!(v.worst_margin.abs() < 1e-15);
    }

    #[test]
    fn negative_binomial_shortcut_direction_verified_by_grid() {
        // Same r, larger p is the smaller law under this parameterization.
        let a = CountingLaw::NegativeBinomial { p: 0.6, r: 2.0 };
        let b = CountingLaw::NegativeBinomial { p: 0.3, r: 2.0 };
        let closed = lg_order_check(&a, &b, 2001).unwrap();
        assert_eq!(closed.ordered, Ordered::Yes);
        // Force the grid path via equivalent tables and compare.
        let at = CountingLaw::Table(a.to_table());
        let bt = CountingLaw::Table(b.to_table());
        let grid = lg_order_check(&at, &bt, 2001).unwrap();
        assert_eq!(grid.ordered, Ordered::Yes);
        let rev = lg_order_check(&b, &a, 2001).unwrap();
        assert_eq!(rev.ordered, Ordered::No);
    }

    #[test]
    fn cum_gamma_shortcut() {
        let g22 = IntensityLaw::Gamma { shape: 2.0, rate: 2.0 };
        let g11 = IntensityLaw::Gamma { shape: 1.0, rate: 1.0 };
        let v = cum_order_check(&g22, &g11, 50.0, 201).unwrap();
        assert_eq!(v.ordered, Ordered::Yes);
        assert_eq!(v.method, CheckMethod::ClosedForm);
        // Means 1 < 2 fail at s = 0.
        let g21 = IntensityLaw::Gamma { shape: 2.0, rate: 1.0 };
        let v = cum_order_check(&g11, &g21, 50.0, 201).unwrap();
        assert_eq!(v.ordered, Ordered::No);
        assert_eq!(v.witness.unwrap().location, 0.0);
    }

    #[test]
    fn cum_degenerate_dominates_equal_mean_mixture() {
        let deg = IntensityLaw::Degenerate { value: 1.0 };
        let tp = IntensityLaw::TwoPoint { lo: 0.5, hi: 1.5, q: 0.5 };
        let v = cum_order_check(&deg, &tp, 50.0, 201).unwrap();
        assert_eq!(v.ordered, Ordered::Yes);
        let rev = cum_order_check(&tp, &deg, 50.0, 201).unwrap();
        assert_eq!(rev.ordered, Ordered::No);
    }

    #[test]
    fn laplace_ratio_nonincreasing() {
        let laws = [
            IntensityLaw::Gamma { shape: 2.0, rate: 3.0 },
            IntensityLaw::TwoPoint { lo: 0.5, hi: 2.0, q: 0.3 },
            IntensityLaw::Degenerate { value: 1.5 },
        ];
        for law in &laws {
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let s = i as f64 * 0.25;
                let r = laplace_ratio(law, s);
                assert!(r <= prev + 1e-12, "{law:?} ratio increased at s={s}");
                prev = r;
            }
        }
    }

    #[test]
    fn variance_consistency_examples() {
        // TwoPoint(0.5, 1.5, 0.5) vs Degenerate(1) under cum:
        // degenerate is smaller, 0 <= 0.25.
        let rep = variance_consistency_intensity(
            &IntensityLaw::Degenerate { value: 1.0 },
            &IntensityLaw::TwoPoint { lo: 0.5, hi: 1.5, q: 0.5 },
            50.0,
            201,
        )
        .unwrap();
        assert!(rep.applicable);
        assert_eq!(rep.ordered, Ordered::Yes);
        assert!(rep.var_a.abs() < 1e-12 && (rep.var_b - 0.25).abs() < 1e-12);
        assert!(rep.consistent);

        // eta = 1 vs {0: 1/2, 2: 1/2} under lg: ordered and 0 <= 1.
        let rep = variance_consistency_counting(
            &CountingLaw::Deterministic(1),
            &CountingLaw::table(vec![0.5, 0.0, 0.5]).unwrap(),
            101,
        )
        .unwrap();
        assert!(rep.applicable && rep.consistent);
        assert_eq!(rep.ordered, Ordered::Yes);
        assert!((rep.var_b - 1.0).abs() < 1e-12);

        // Unequal means: not applicable.
        let rep = variance_consistency_counting(
            &CountingLaw::Poisson(1.0),
            &CountingLaw::Poisson(2.0),
            101,
        )
        .unwrap();
        assert!(!rep.applicable);
    }

    #[test]
    fn scaling_order_examples() {
        let v = stochastic_scaling_order(
            &ScalarLaw::Deterministic(1.0),
            &ScalarLaw::Deterministic(0.5),
        );
        assert_eq!(v.ordered, Ordered::Yes);
        let v = stochastic_scaling_order(
            &ScalarLaw::Uniform { lo: 0.0, hi: 2.0 },
            &ScalarLaw::Uniform { lo: 0.0, hi: 1.0 },
        );
        assert_eq!(v.ordered, Ordered::Yes);
        // Crossing survivals: not ordered either way.
        let u01 = ScalarLaw::Uniform { lo: 0.0, hi: 1.0 };
        let d05 = ScalarLaw::Deterministic(0.5);
        let v = stochastic_scaling_order(&u01, &d05);
        assert_eq!(v.ordered, Ordered::No);
        assert!(v.witness.unwrap().location < 0.5);
        let v = stochastic_scaling_order(&d05, &u01);
        assert_eq!(v.ordered, Ordered::No);
        assert!(v.witness.unwrap().location > 0.5);
    }
}
