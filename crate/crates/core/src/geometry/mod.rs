//! Gauge bodies (structuring elements) and gauge-relative distances.
//!
//! A gauge body `B` is a compact convex set containing the origin. The
//! `B`-distance from a point `x` to a set `K` is the smallest dilation
//! `t >= 0` such that `x + tB` hits `K`; it equals the Minkowski gauge of the
//! displacement for point targets. All grains in this crate are balls, so the
//! only distance primitive needed is point-to-ball.

mod contact;
mod halfspace;
mod nu;
mod sectors;
mod steiner;

pub use contact::{scene_contact, Contact, SceneIndex};
pub(crate) use contact::contact_direction as contact_direction_for;
pub use halfspace::{
    half_space_empty_balls, half_space_empty_points, shrink_preserves_emptiness,
    supporting_halfspace_normal,
};
pub use nu::{nu_measure, nu_measure_mc, sample_direction, NuEstimate, NuMethod};
pub use sectors::DirectionSectors;
pub use steiner::{steiner_coefficients_ball_grain, steiner_coefficients_mc, SteinerCoefficients};

use crate::error::GeometryError;
use crate::util::{dot, norm};
use serde::{Deserialize, Serialize};

const BISECTION_ITERS: usize = 60;

/// Shape variants of a gauge body. Polygons are two-dimensional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Ball { radius: f64 },
    Box { half_widths: Vec<f64> },
    Polygon { vertices: Vec<[f64; 2]> },
    Segment { endpoint: Vec<f64> },
}

/// A structuring element: compact, convex, containing the origin.
///
/// Ball, box and polygon variants contain a neighborhood of the origin and
/// are full-dimensional; a segment from the origin is lower-dimensional and
/// rejected by the operations that require full dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct GaugeBody {
    shape: Shape,
    dim: usize,
    /// Polygon only: outward edge vectors `a_j` with `B = {x : a_j . x <= 1}`.
    #[serde(skip)]
    poly_ineqs: Vec<[f64; 2]>,
}

impl TryFrom<Shape> for GaugeBody {
    type Error = GeometryError;
    fn try_from(shape: Shape) -> Result<Self, GeometryError> {
        GaugeBody::new(shape)
    }
}

impl From<GaugeBody> for Shape {
    fn from(b: GaugeBody) -> Shape {
        b.shape
    }
}

impl GaugeBody {
    pub fn new(shape: Shape) -> Result<Self, GeometryError> {
        let (dim, poly_ineqs) = match &shape {
            Shape::Ball { radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(GeometryError::InvalidShape(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                // Dimension is supplied at use sites for balls; default 2 is
                // overridden by `ball(radius, dim)`.
                (2, Vec::new())
            }
            Shape::Box { half_widths } => {
                if half_widths.is_empty() || half_widths.iter().any(|h| !(*h > 0.0)) {
                    return Err(GeometryError::InvalidShape(
                        "box half-widths must be positive".into(),
                    ));
                }
                (half_widths.len(), Vec::new())
            }
            Shape::Polygon { vertices } => {
                let ineqs = polygon_inequalities(vertices)?;
                (2, ineqs)
            }
            Shape::Segment { endpoint } => {
                if endpoint.is_empty() || norm(endpoint) == 0.0 {
                    return Err(GeometryError::InvalidShape(
                        "segment endpoint must be nonzero".into(),
                    ));
                }
                (endpoint.len(), Vec::new())
            }
        };
        Ok(GaugeBody {
            shape,
            dim,
            poly_ineqs,
        })
    }

    /// Euclidean ball of the given radius in dimension `dim`.
    pub fn ball(radius: f64, dim: usize) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidShape("dimension must be >= 1".into()));
        }
        let mut b = Self::new(Shape::Ball { radius })?;
        b.dim = dim;
        Ok(b)
    }

    /// Unit ball in dimension `dim`.
    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(1.0, dim).expect("unit ball is valid")
    }

    pub fn boxed(half_widths: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(Shape::Box { half_widths })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        Self::new(Shape::Polygon { vertices })
    }

    pub fn segment(endpoint: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(Shape::Segment { endpoint })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Segments are lower-dimensional; everything else contains a
    /// neighborhood of the origin.
    pub fn is_full_dimensional(&self) -> bool {
        !matches!(self.shape, Shape::Segment { .. })
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        match &self.shape {
            Shape::Ball { .. } | Shape::Box { .. } => true,
            Shape::Polygon { vertices } => {
                vertices.iter().all(|v| {
                    let neg = [-v[0], -v[1]];
                    self.gauge(&neg) <= 1.0 + 1e-12
                })
            }
            Shape::Segment { .. } => false,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// The reflected body `B* = {-x : x in B}`.
    pub fn reflected(&self) -> GaugeBody {
        let shape = match &self.shape {
            Shape::Ball { radius } => Shape::Ball { radius: *radius },
            Shape::Box { half_widths } => Shape::Box {
                half_widths: half_widths.clone(),
            },
            Shape::Polygon { vertices } => {
                // Negation is a half-turn rotation: orientation is preserved.
                let refl: Vec<[f64; 2]> = vertices.iter().map(|v| [-v[0], -v[1]]).collect();
                Shape::Polygon { vertices: refl }
            }
            Shape::Segment { endpoint } => Shape::Segment {
                endpoint: endpoint.iter().map(|x| -x).collect(),
            },
        };
        let mut b = GaugeBody::new(shape).expect("reflection preserves validity");
        b.dim = self.dim;
        b
    }

    /// Minkowski gauge of `x` with respect to `B`: `inf { t >= 0 : x in tB }`.
    ///
    /// Positively homogeneous; `+inf` when `x` lies outside the cone spanned
    /// by `B` (possible only for segments).
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => norm(x) / radius,
            Shape::Box { half_widths } => x
                .iter()
                .zip(half_widths)
                .map(|(xi, hi)| (xi / hi).abs())
                .fold(0.0, f64::max),
            Shape::Polygon { .. } => self
                .poly_ineqs
                .iter()
                .map(|a| a[0] * x[0] + a[1] * x[1])
                .fold(0.0, f64::max),
            Shape::Segment { endpoint } => {
                // x must be a nonnegative multiple of the endpoint.
                let e2 = dot(endpoint, endpoint);
                let s = dot(x, endpoint) / e2;
                if s < 0.0 {
                    return f64::INFINITY;
                }
                let off2: f64 = x
                    .iter()
                    .zip(endpoint)
                    .map(|(xi, ei)| (xi - s * ei).powi(2))
                    .sum();
                let scale2 = dot(x, x).max(1.0);
                if off2 > 1e-24 * scale2 {
                    f64::INFINITY
                } else {
                    s
                }
            }
        }
    }

    /// Gauge of `x` with respect to the reflected body, `gauge_{B*}(x)`,
    /// computed without materializing `B*`.
    pub fn gauge_reflected(&self, x: &[f64]) -> f64 {
        match &self.shape {
            // Centrally symmetric shapes are their own reflection.
            Shape::Ball { .. } | Shape::Box { .. } => self.gauge(x),
            _ => {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                self.gauge(&neg)
            }
        }
    }

    /// Support function `h_B(u) = sup { u . b : b in B }`.
    pub fn support(&self, u: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => radius * norm(u),
            Shape::Box { half_widths } => u
                .iter()
                .zip(half_widths)
                .map(|(ui, hi)| ui.abs() * hi)
                .sum(),
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|v| u[0] * v[0] + u[1] * v[1])
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Segment { endpoint } => dot(u, endpoint).max(0.0),
        }
    }

    /// Radius of the smallest origin-centered Euclidean ball containing `B`.
    pub fn max_norm_radius(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => *radius,
            Shape::Box { half_widths } => norm(half_widths),
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
                .fold(0.0, f64::max),
            Shape::Segment { endpoint } => norm(endpoint),
        }
    }

    /// Axis-aligned bounding intervals of the reflected body `B*`.
    pub fn bounding_box_reflected(&self) -> Vec<[f64; 2]> {
        match &self.shape {
            Shape::Ball { radius } => vec![[-radius, *radius]; self.dim],
            Shape::Box { half_widths } => half_widths.iter().map(|h| [-h, *h]).collect(),
            Shape::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(-v[k]);
                        hi[k] = hi[k].max(-v[k]);
                    }
                }
                vec![[lo[0], hi[0]], [lo[1], hi[1]]]
            }
            Shape::Segment { endpoint } => endpoint
                .iter()
                .map(|e| [(-e).min(0.0), (-e).max(0.0)])
                .collect(),
        }
    }

    /// Volume of the reflected body (equals the volume of `B`).
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => crate::unit_ball_volume(self.dim) * radius.powi(self.dim as i32),
            Shape::Box { half_widths } => half_widths.iter().map(|h| 2.0 * h).product(),
            Shape::Polygon { vertices } => {
                let mut area = 0.0;
                for i in 0..vertices.len() {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % vertices.len()];
                    area += a[0] * b[1] - b[0] * a[1];
                }
                area / 2.0
            }
            Shape::Segment { .. } => 0.0,
        }
    }

    /// Euclidean distance from `point` to the scaled translate `base + tB`.
    ///
    /// Nonincreasing in `t` because `B` contains the origin.
    pub fn dist_to_scaled(&self, t: f64, base: &[f64], point: &[f64]) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.shape {
            Shape::Ball { radius } => {
                let d: f64 = point
                    .iter()
                    .zip(base)
                    .map(|(p, b)| (p - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (d - t * radius).max(0.0)
            }
            Shape::Box { half_widths } => point
                .iter()
                .zip(base)
                .zip(half_widths)
                .map(|((p, b), h)| ((p - b).abs() - t * h).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
            Shape::Polygon { vertices } => {
                let q = [point[0] - base[0], point[1] - base[1]];
                if t == 0.0 {
                    return (q[0] * q[0] + q[1] * q[1]).sqrt();
                }
                if self.gauge(&[q[0] / t, q[1] / t]) <= 1.0 {
                    return 0.0;
                }
                let mut best = f64::INFINITY;
                for i in 0..vertices.len() {
                    let a = [t * vertices[i][0], t * vertices[i][1]];
                    let j = (i + 1) % vertices.len();
                    let b = [t * vertices[j][0], t * vertices[j][1]];
                    best = best.min(dist_point_segment(&q, &a, &b));
                }
                best
            }
            Shape::Segment { endpoint } => {
                let q: Vec<f64> = point.iter().zip(base).map(|(p, b)| p - b).collect();
                let end: Vec<f64> = endpoint.iter().map(|e| t * e).collect();
                let zero = vec![0.0; q.len()];
                dist_point_segment_nd(&q, &zero, &end)
            }
        }
    }

    /// Closest point of `base + tB` to `point` (the relative metric
    /// projection target used for contact directions).
    pub fn project_onto_scaled(&self, t: f64, base: &[f64], point: &[f64], out: &mut [f64]) {
        match &self.shape {
            Shape::Ball { radius } => {
                let r = t * radius;
                let mut d2 = 0.0;
                for k in 0..point.len() {
                    out[k] = point[k] - base[k];
                    d2 += out[k] * out[k];
                }
                let d = d2.sqrt();
                let scale = if d <= r || d == 0.0 { 1.0 } else { r / d };
                for k in 0..point.len() {
                    out[k] = base[k] + out[k] * scale;
                }
            }
            Shape::Box { half_widths } => {
                for k in 0..point.len() {
                    let h = t * half_widths[k];
                    out[k] = base[k] + (point[k] - base[k]).clamp(-h, h);
                }
            }
            Shape::Polygon { vertices } => {
                let q = [point[0] - base[0], point[1] - base[1]];
                if t == 0.0 || self.gauge(&[q[0] / t, q[1] / t]) <= 1.0 {
                    out[0] = point[0];
                    out[1] = point[1];
                    if t == 0.0 {
                        out[0] = base[0];
                        out[1] = base[1];
                    }
                    return;
                }
                let mut best = f64::INFINITY;
                let mut bp = [0.0; 2];
                for i in 0..vertices.len() {
                    let a = [t * vertices[i][0], t * vertices[i][1]];
                    let j = (i + 1) % vertices.len();
                    let b = [t * vertices[j][0], t * vertices[j][1]];
                    let p = project_point_segment(&q, &a, &b);
                    let d = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                    if d < best {
                        best = d;
                        bp = p;
                    }
                }
                out[0] = base[0] + bp[0];
                out[1] = base[1] + bp[1];
            }
            Shape::Segment { endpoint } => {
                let e2 = dot(endpoint, endpoint);
                let mut s = 0.0;
                for k in 0..point.len() {
                    s += (point[k] - base[k]) * endpoint[k];
                }
                let s = (s / e2).clamp(0.0, t);
                for k in 0..point.len() {
                    out[k] = base[k] + s * endpoint[k];
                }
            }
        }
    }
}

fn polygon_inequalities(vertices: &[[f64; 2]]) -> Result<Vec<[f64; 2]>, GeometryError> {
    if vertices.len() < 3 {
        return Err(GeometryError::InvalidShape(
            "polygon needs at least 3 vertices".into(),
        ));
    }
    let n = vertices.len();
    let mut ineqs = Vec::with_capacity(n);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross <= 0.0 {
            return Err(GeometryError::InvalidShape(
                "polygon vertices must be strictly convex in counter-clockwise order".into(),
            ));
        }
        // Outward normal of edge a->b for a CCW polygon.
        let e = [b[0] - a[0], b[1] - a[1]];
        let normal = [e[1], -e[0]];
        let offset = normal[0] * a[0] + normal[1] * a[1];
        if offset <= 0.0 {
            return Err(GeometryError::InvalidShape(
                "polygon must contain the origin in its interior".into(),
            ));
        }
        ineqs.push([normal[0] / offset, normal[1] / offset]);
    }
    Ok(ineqs)
}

fn dist_point_segment(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let q = project_point_segment(p, a, b);
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn project_point_segment(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return *a;
    }
    let s = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    [a[0] + s * ab[0], a[1] + s * ab[1]]
}

fn dist_point_segment_nd(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let len2: f64 = a.iter().zip(b).map(|(x, y)| (y - x).powi(2)).sum();
    if len2 == 0.0 {
        return p.iter().zip(a).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    }
    let s: f64 = p
        .iter()
        .zip(a.iter().zip(b))
        .map(|(pi, (ai, bi))| (pi - ai) * (bi - ai))
        .sum::<f64>()
        / len2;
    let s = s.clamp(0.0, 1.0);
    p.iter()
        .zip(a.iter().zip(b))
        .map(|(pi, (ai, bi))| (pi - (ai + s * (bi - ai))).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Gauge distance of a single point: `d_B(0, {x})`, the Minkowski gauge.
pub fn gauge_distance(gauge: &GaugeBody, x: &[f64]) -> Result<f64, GeometryError> {
    gauge.check_dim(x)?;
    Ok(gauge.gauge(x))
}

/// `B`-distance from `x` to the closed ball `B(center, radius)`:
/// the smallest `t` with `(x + tB)` hitting the ball.
///
/// Exact for balls and point grains; monotone bisection (60 fixed iterations)
/// on the convex feasibility test otherwise. Returns `+inf` when no dilation
/// reaches the target (possible for segments).
pub fn distance_to_ball(
    gauge: &GaugeBody,
    x: &[f64],
    center: &[f64],
    radius: f64,
) -> Result<f64, GeometryError> {
    gauge.check_dim(x)?;
    gauge.check_dim(center)?;
    if radius < 0.0 {
        return Err(GeometryError::InvalidShape(format!(
            "grain radius must be nonnegative, got {radius}"
        )));
    }
    Ok(distance_to_ball_unchecked(gauge, x, center, radius))
}

pub(crate) fn distance_to_ball_unchecked(
    gauge: &GaugeBody,
    x: &[f64],
    center: &[f64],
    radius: f64,
) -> f64 {
    match gauge.shape() {
        Shape::Ball { radius: rb } => {
            let d: f64 = x
                .iter()
                .zip(center)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            (d - radius).max(0.0) / rb
        }
        _ => {
            if gauge.dist_to_scaled(0.0, x, center) <= radius {
                return 0.0;
            }
            if radius == 0.0 {
                // d_B(x, {c}) equals the gauge of the displacement c - x.
                let delta: Vec<f64> = center.iter().zip(x).map(|(c, a)| c - a).collect();
                return gauge.gauge(&delta);
            }
            // Bracket the feasible set {t : dist(center, x + tB) <= radius}.
            let mut hi = {
                let delta: Vec<f64> = center.iter().zip(x).map(|(c, a)| c - a).collect();
                gauge.gauge(&delta)
            };
            if !hi.is_finite() {
                // Segment pointing away from a fat target can still reach it.
                hi = 1.0;
                let mut reached = false;
                for _ in 0..80 {
                    if gauge.dist_to_scaled(hi, x, center) <= radius {
                        reached = true;
                        break;
                    }
                    hi *= 2.0;
                }
                if !reached {
                    return f64::INFINITY;
                }
            }
            let mut lo = 0.0;
            for _ in 0..BISECTION_ITERS {
                let mid = 0.5 * (lo + hi);
                if gauge.dist_to_scaled(mid, x, center) <= radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    }
}
