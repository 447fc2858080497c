//! Experiment configuration: one JSON file drives a run.

use emptyspace::estimator::EstimatorConfig;
use emptyspace::models::{IntensityLaw, ProcessSpec, ScalarLaw};
use emptyspace::orderings::CountingLaw;
use emptyspace::{DirectionSectors, GaugeBody, SemiMcConfig};
use serde::{Deserialize, Serialize};

fn default_slack() -> f64 {
    emptyspace::estimator::DEFAULT_ORDER_SLACK
}

fn default_out() -> String {
    "out".to_string()
}

fn default_sectors() -> DirectionSectors {
    DirectionSectors::Full
}

fn default_lg_grid() -> usize {
    1001
}

fn default_cum_grid() -> usize {
    2001
}

fn default_s_max() -> f64 {
    50.0
}

/// Dilation grid and estimator budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorParams {
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub grid_resolution: usize,
    pub replications: usize,
}

impl EstimatorParams {
    pub fn t_grid(&self) -> Vec<f64> {
        (0..self.t_steps)
            .map(|i| {
                self.t_min + (self.t_max - self.t_min) * i as f64 / (self.t_steps - 1).max(1) as f64
            })
            .collect()
    }

    pub fn to_config(&self, sectors: &DirectionSectors, seed: u64) -> EstimatorConfig {
        EstimatorConfig {
            t_grid: self.t_grid(),
            grid_resolution: self.grid_resolution,
            replications: self.replications,
            sectors: sectors.clone(),
            seed,
        }
    }
}

/// Monte Carlo budget for the semi-analytic formulas (the seed comes from
/// the experiment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiMcParams {
    pub outer_samples: usize,
    pub inner_samples: usize,
}

impl Default for SemiMcParams {
    fn default() -> Self {
        let d = SemiMcConfig::default();
        SemiMcParams {
            outer_samples: d.outer_samples,
            inner_samples: d.inner_samples,
        }
    }
}

impl SemiMcParams {
    pub fn to_config(&self, seed: u64) -> SemiMcConfig {
        SemiMcConfig {
            outer_samples: self.outer_samples,
            inner_samples: self.inner_samples,
            seed,
        }
    }
}

/// One stochastic-order check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "order", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrderSpec {
    /// Length-biased generating-function order on counting laws.
    Lg {
        law_a: CountingLaw,
        law_b: CountingLaw,
        #[serde(default = "default_lg_grid")]
        grid_points: usize,
    },
    /// First-cumulant order on intensity laws.
    Cum {
        law_a: IntensityLaw,
        law_b: IntensityLaw,
        #[serde(default = "default_s_max")]
        s_max: f64,
        #[serde(default = "default_cum_grid")]
        grid_points: usize,
    },
    /// Stochastic dominance of scaling variables (`law_b` smaller).
    Scaling { law_a: ScalarLaw, law_b: ScalarLaw },
}

/// Top-level experiment description. Unknown fields are hard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec_a: Option<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec_b: Option<ProcessSpec>,
    pub gauge: GaugeBody,
    #[serde(default = "default_sectors")]
    pub sectors: DirectionSectors,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorParams>,
    #[serde(default)]
    pub semi_mc: SemiMcParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderSpec>,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_out")]
    pub out_dir: String,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config error: {e}"))
    }

    /// Canonical serialized form; hashing and idempotence use this.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// A ball gauge body carries no dimension of its own in the config;
    /// align it with the spec dimension.
    pub fn gauge_for(&self, dimension: usize) -> Result<GaugeBody, String> {
        match self.gauge.shape() {
            emptyspace::geometry::Shape::Ball { radius } => {
                GaugeBody::ball(*radius, dimension).map_err(|e| e.to_string())
            }
            _ => {
                if self.gauge.dim() != dimension {
                    Err(format!(
                        "gauge body dimension {} does not match spec dimension {dimension}",
                        self.gauge.dim()
                    ))
                } else {
                    Ok(self.gauge.clone())
                }
            }
        }
    }
}
