//! Partitions of direction space for directed empty-space statistics.

use crate::error::GeometryError;
use crate::util::{dot, norm};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A finite partition of direction space: every nonzero vector maps to
/// exactly one sector.
///
/// `Angular` partitions (half-open angle intervals) are two-dimensional;
/// `NearestOf` assigns a direction to the reference axis with the largest
/// inner product (ties to the lowest index) and works in any dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionSectors {
    Full,
    Angular { cuts: Vec<f64> },
    NearestOf { axes: Vec<Vec<f64>> },
}

impl DirectionSectors {
    /// Evenly spaced angular sectors starting at angle 0 (d = 2).
    pub fn quadrants(count: usize) -> Self {
        let cuts = (0..count).map(|i| TAU * i as f64 / count as f64).collect();
        DirectionSectors::Angular { cuts }
    }

    pub fn count(&self) -> usize {
        match self {
            DirectionSectors::Full => 1,
            DirectionSectors::Angular { cuts } => cuts.len(),
            DirectionSectors::NearestOf { axes } => axes.len(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        match self {
            DirectionSectors::Full => Ok(()),
            DirectionSectors::Angular { cuts } => {
                if dim != 2 {
                    return Err(GeometryError::InvalidSectors(
                        "angular sectors are two-dimensional".into(),
                    ));
                }
                if cuts.is_empty() {
                    return Err(GeometryError::InvalidSectors("no sector cuts".into()));
                }
                if cuts.iter().any(|c| !(0.0..TAU).contains(c)) {
                    return Err(GeometryError::InvalidSectors(
                        "cuts must lie in [0, 2*pi)".into(),
                    ));
                }
                if cuts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(GeometryError::InvalidSectors(
                        "cuts must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            DirectionSectors::NearestOf { axes } => {
                if axes.is_empty() {
                    return Err(GeometryError::InvalidSectors("no axes".into()));
                }
                for a in axes {
                    if a.len() != dim {
                        return Err(GeometryError::InvalidSectors(
                            "axis dimension mismatch".into(),
                        ));
                    }
                    if norm(a) == 0.0 {
                        return Err(GeometryError::InvalidSectors("zero axis".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Sector index of a nonzero direction vector.
    pub fn classify(&self, v: &[f64]) -> usize {
        match self {
            DirectionSectors::Full => 0,
            DirectionSectors::Angular { cuts } => {
                let mut theta = v[1].atan2(v[0]);
                if theta < 0.0 {
                    theta += TAU;
                }
                // Last cut whose angle is <= theta; directions below the first
                // cut wrap into the final sector.
                match cuts.binary_search_by(|c| c.partial_cmp(&theta).unwrap()) {
                    Ok(i) => i,
                    Err(0) => cuts.len() - 1,
                    Err(i) => i - 1,
                }
            }
            DirectionSectors::NearestOf { axes } => {
                let nv = norm(v);
                let mut best = 0;
                let mut best_dot = f64::NEG_INFINITY;
                for (i, a) in axes.iter().enumerate() {
                    let d = dot(a, v) / (norm(a) * nv);
                    if d > best_dot + 1e-15 {
                        best_dot = d;
                        best = i;
                    }
                }
                best
            }
        }
    }

    /// Exact fraction of the rotation-invariant direction measure per sector,
    /// available only when the partition is angular (or trivial).
    pub fn isotropic_fractions(&self) -> Option<Vec<f64>> {
        match self {
            DirectionSectors::Full => Some(vec![1.0]),
            DirectionSectors::Angular { cuts } => {
                let k = cuts.len();
                let mut fr = Vec::with_capacity(k);
                for i in 0..k {
                    let width = if i + 1 < k {
                        cuts[i + 1] - cuts[i]
                    } else {
                        TAU - cuts[k - 1] + cuts[0]
                    };
                    fr.push(width / TAU);
                }
                Some(fr)
            }
            DirectionSectors::NearestOf { .. } => None,
        }
    }

    /// Column labels used in serialized tables: the total first, then one
    /// label per sector.
    pub fn labels(&self) -> Vec<String> {
        let mut out = vec!["all".to_string()];
        for i in 0..self.count() {
            out.push(format!("s{i}"));
        }
        out
    }
}
