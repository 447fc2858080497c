//! Contact distances and directions from query points to a realized scene.
//!
//! Scenes live on a torus; germ displacements are wrapped per axis. For
//! centrally symmetric gauge bodies the per-axis wrapped copy minimizes the
//! gauge distance; asymmetric shapes additionally scan neighbor copies in the
//! uncapped path.

use super::{GaugeBody, Shape};
use crate::models::GermGrainScene;
use crate::util::wrap_delta;

/// Result of a scene contact query.
///
/// `direction` lies on the boundary of the reflected gauge body; covered or
/// unreachable query points report the fixed convention direction. Ties
/// within `1e-9 * window` pick the lowest grain index and set `tie`.
#[derive(Debug, Clone)]
pub struct Contact {
    pub distance: f64,
    pub direction: Vec<f64>,
    pub grain: Option<usize>,
    pub tie: bool,
    pub covered: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RawContact {
    pub distance: f64,
    pub grain: u32,
    pub tie: bool,
}

const NO_GRAIN: u32 = u32::MAX;

/// Gauge distance from `x` to the nearest grain of the scene, with contact
/// direction and grain index. Scans every grain (and torus copies where the
/// gauge body is asymmetric); use [`SceneIndex`] for repeated queries.
pub fn scene_contact(gauge: &GaugeBody, x: &[f64], scene: &GermGrainScene) -> Contact {
    let dim = scene.dim;
    assert_eq!(gauge.dim(), dim, "gauge body dimension mismatch");
    let tol = 1e-9 * scene.window;
    let symmetric = matches!(gauge.shape(), Shape::Ball { .. } | Shape::Box { .. });

    let mut best = RawContact {
        distance: f64::INFINITY,
        grain: NO_GRAIN,
        tie: false,
    };
    let mut c_eff = vec![0.0; dim];
    let mut offsets: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    if !symmetric {
        offsets = torus_offsets(dim, scene.window);
    }
    for (j, center) in scene.germs.chunks_exact(dim).enumerate() {
        let radius = scene.radii[j];
        for off in &offsets {
            for k in 0..dim {
                c_eff[k] = x[k] + wrap_delta(center[k] - x[k], scene.window) + off[k];
            }
            let d = super::distance_to_ball_unchecked(gauge, x, &c_eff, radius);
            update_best(&mut best, d, j as u32, tol);
        }
    }
    finish_contact(gauge, x, scene, best)
}

fn torus_offsets(dim: usize, window: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut idx = vec![0i32; dim];
    loop {
        out.push(idx.iter().map(|&i| i as f64 * window).collect());
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] <= 1 {
                break;
            }
            idx[k] = -1;
            k += 1;
            if k == dim {
                return out;
            }
        }
    }
}

fn update_best(best: &mut RawContact, d: f64, grain: u32, tol: f64) {
    if d < best.distance - tol {
        best.distance = d;
        best.grain = grain;
        best.tie = false;
    } else if d <= best.distance + tol && grain != best.grain && best.grain != NO_GRAIN {
        if d < best.distance {
            best.distance = d;
            best.grain = best.grain.min(grain);
        }
        best.tie = true;
    }
}

fn finish_contact(
    gauge: &GaugeBody,
    x: &[f64],
    scene: &GermGrainScene,
    best: RawContact,
) -> Contact {
    let dim = scene.dim;
    if best.grain == NO_GRAIN || !best.distance.is_finite() {
        return Contact {
            distance: f64::INFINITY,
            direction: gauge.convention_direction(),
            grain: None,
            tie: false,
            covered: false,
        };
    }
    if best.distance == 0.0 {
        return Contact {
            distance: 0.0,
            direction: gauge.convention_direction(),
            grain: Some(best.grain as usize),
            tie: best.tie,
            covered: true,
        };
    }
    let j = best.grain as usize;
    let mut dir = vec![0.0; dim];
    let center = &scene.germs[j * dim..(j + 1) * dim];
    let mut c_eff = vec![0.0; dim];
    for k in 0..dim {
        c_eff[k] = x[k] + wrap_delta(center[k] - x[k], scene.window);
    }
    contact_direction(gauge, x, &c_eff, scene.radii[j], best.distance, &mut dir);
    Contact {
        distance: best.distance,
        direction: dir,
        grain: Some(j),
        tie: best.tie,
        covered: false,
    }
}

/// Contact direction for a resolved nearest grain: the vector from the
/// contact point back to the query, scaled onto the boundary of the
/// reflected body.
pub(crate) fn contact_direction(
    gauge: &GaugeBody,
    x: &[f64],
    center: &[f64],
    radius: f64,
    distance: f64,
    out: &mut [f64],
) {
    debug_assert!(distance > 0.0);
    if let Shape::Ball { radius: rb } = gauge.shape() {
        // Unit vector from the grain center toward the query, scaled to the
        // reflected boundary (a sphere of radius rb).
        let mut n2 = 0.0;
        for k in 0..out.len() {
            out[k] = x[k] - center[k];
            n2 += out[k] * out[k];
        }
        let s = rb / n2.sqrt();
        for v in out.iter_mut() {
            *v *= s;
        }
        return;
    }
    // y = closest point of x + dB to the grain center is the contact point.
    let mut y = vec![0.0; out.len()];
    gauge.project_onto_scaled(distance, x, center, &mut y);
    for k in 0..out.len() {
        out[k] = (x[k] - y[k]) / distance;
    }
    let _ = radius;
    // Bisection leaves the direction a hair off the boundary; renormalize.
    let g = gauge.gauge_reflected(out);
    if g.is_finite() && g > 0.0 {
        for v in out.iter_mut() {
            *v /= g;
        }
    }
}

/// Cell-list accelerator over a scene for capped contact queries.
///
/// Queries report `+inf` when no grain lies within gauge distance `cap`; the
/// Euclidean reach `cap * R_B + r_max` must stay below half the window.
pub struct SceneIndex<'a> {
    scene: &'a GermGrainScene,
    gauge_max_norm: f64,
    cap: f64,
    cells_per_axis: usize,
    cell_size: f64,
    cells: Vec<Vec<u32>>,
    scan_all: bool,
}

impl<'a> SceneIndex<'a> {
    pub fn build(scene: &'a GermGrainScene, gauge: &GaugeBody, cap: f64) -> Self {
        let dim = scene.dim;
        let r_max = scene.radii.iter().copied().fold(0.0, f64::max);
        let gauge_max_norm = gauge.max_norm_radius();
        let reach = cap * gauge_max_norm + r_max;
        let n = ((scene.window / reach.max(1e-12)).floor() as usize).max(1);
        // Oversized grains or reach: fall back to scanning every grain.
        let scan_all = n < 3 || dim > 3 || reach >= scene.window / 2.0;
        let cell_size = scene.window / n as f64;
        let mut cells = vec![Vec::new(); if scan_all { 0 } else { n.pow(dim as u32) }];
        if !scan_all {
            for (j, center) in scene.germs.chunks_exact(dim).enumerate() {
                let idx = Self::cell_of(center, cell_size, n, dim);
                cells[idx].push(j as u32);
            }
        }
        SceneIndex {
            scene,
            gauge_max_norm,
            cap,
            cells_per_axis: n,
            cell_size,
            cells,
            scan_all,
        }
    }

    fn cell_of(p: &[f64], cell_size: f64, n: usize, dim: usize) -> usize {
        let mut idx = 0;
        for k in 0..dim {
            let c = ((p[k] / cell_size) as usize).min(n - 1);
            idx = idx * n + c;
        }
        idx
    }

    pub(crate) fn contact(&self, gauge: &GaugeBody, x: &[f64]) -> RawContact {
        let scene = self.scene;
        let dim = scene.dim;
        let tol = 1e-9 * scene.window;
        let mut best = RawContact {
            distance: f64::INFINITY,
            grain: NO_GRAIN,
            tie: false,
        };
        let mut c_eff = vec![0.0; dim];
        let mut visit = |j: u32, best: &mut RawContact| {
            let center = &scene.germs[j as usize * dim..(j as usize + 1) * dim];
            let radius = scene.radii[j as usize];
            let mut e2 = 0.0;
            for k in 0..dim {
                c_eff[k] = x[k] + wrap_delta(center[k] - x[k], scene.window);
                e2 += (c_eff[k] - x[k]).powi(2);
            }
            // d_B >= (euclid - radius) / R_B prunes grains that cannot beat
            // the current best or the cap.
            let lower = (e2.sqrt() - radius).max(0.0) / self.gauge_max_norm;
            if lower > best.distance.min(self.cap) + tol {
                return;
            }
            let d = super::distance_to_ball_unchecked(gauge, x, &c_eff, radius);
            update_best(best, d, j, tol);
        };
        if self.scan_all {
            for j in 0..scene.radii.len() as u32 {
                visit(j, &mut best);
            }
        } else {
            let n = self.cells_per_axis;
            let mut base = vec![0usize; dim];
            for k in 0..dim {
                base[k] = ((x[k] / self.cell_size) as usize).min(n - 1);
            }
            let mut neighbor = vec![0usize; dim];
            let mut steps = vec![-1i32; dim];
            loop {
                for k in 0..dim {
                    neighbor[k] = (base[k] + n).wrapping_add_signed(steps[k] as isize) % n;
                }
                let mut idx = 0;
                for k in 0..dim {
                    idx = idx * n + neighbor[k];
                }
                for &j in &self.cells[idx] {
                    visit(j, &mut best);
                }
                let mut k = 0;
                loop {
                    steps[k] += 1;
                    if steps[k] <= 1 {
                        break;
                    }
                    steps[k] = -1;
                    k += 1;
                    if k == dim {
                        return self.censor(best);
                    }
                }
            }
        }
        self.censor(best)
    }

    fn censor(&self, mut best: RawContact) -> RawContact {
        if best.distance > self.cap {
            best.distance = f64::INFINITY;
            best.grain = NO_GRAIN;
            best.tie = false;
        }
        best
    }

    /// Full contact (with direction) through the index.
    pub fn contact_full(&self, gauge: &GaugeBody, x: &[f64]) -> Contact {
        let raw = self.contact(gauge, x);
        finish_contact(gauge, x, self.scene, raw)
    }
}
