//! Supporting-half-space emptiness tests and the cluster shrinking lemma.
//!
//! At a regular boundary point `-u` of the gauge body the tangential cone is
//! the supporting half-space `{v : n . v <= 0}` with `n` the outer unit
//! normal. Large-dilation hazard limits replace the dilated body by this
//! half-space.

use super::{GaugeBody, Shape};
use crate::error::GeometryError;
use crate::util::norm;

/// Outer unit normal of the gauge body at the boundary point `-u`, where
/// `u` lies on the boundary of the reflected body. Errors when `-u` is not a
/// regular boundary point (box edges/corners, polygon vertices).
pub fn supporting_halfspace_normal(
    gauge: &GaugeBody,
    u: &[f64],
) -> Result<Vec<f64>, GeometryError> {
    let g = gauge.gauge_reflected(u);
    if !((g - 1.0).abs() <= 1e-9) {
        return Err(GeometryError::NotOnBoundary { gauge: g });
    }
    match gauge.shape() {
        Shape::Ball { .. } => {
            let n = norm(u);
            Ok(u.iter().map(|x| -x / n).collect())
        }
        Shape::Box { half_widths } => {
            let mut face = None;
            for (k, h) in half_widths.iter().enumerate() {
                if ((-u[k]).abs() - h).abs() <= 1e-9 * h {
                    if face.is_some() {
                        return Err(GeometryError::NonRegularDirection);
                    }
                    face = Some((k, (-u[k]).signum()));
                }
            }
            let (k, sign) = face.ok_or(GeometryError::NonRegularDirection)?;
            let mut n = vec![0.0; u.len()];
            n[k] = sign;
            Ok(n)
        }
        Shape::Polygon { .. } => {
            let p = [-u[0], -u[1]];
            let mut hit = None;
            for a in gauge.polygon_inequalities() {
                if (a[0] * p[0] + a[1] * p[1] - 1.0).abs() <= 1e-9 {
                    if hit.is_some() {
                        return Err(GeometryError::NonRegularDirection);
                    }
                    hit = Some(*a);
                }
            }
            let a = hit.ok_or(GeometryError::NonRegularDirection)?;
            let n = (a[0] * a[0] + a[1] * a[1]).sqrt();
            Ok(vec![a[0] / n, a[1] / n])
        }
        Shape::Segment { .. } => Err(GeometryError::SegmentNotSupported),
    }
}

impl GaugeBody {
    pub(crate) fn polygon_inequalities(&self) -> &[[f64; 2]] {
        &self.poly_ineqs
    }

    /// Fixed conventional contact direction `u_0` on the boundary of the
    /// reflected body, reported for covered or unreachable query points.
    pub fn convention_direction(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        let g = self.gauge_reflected(&e1);
        if g.is_finite() && g > 0.0 {
            return e1.iter().map(|x| x / g).collect();
        }
        match self.shape() {
            Shape::Segment { endpoint } => endpoint.iter().map(|x| -x).collect(),
            _ => e1,
        }
    }
}

/// True iff no point of `points` (flat, `dim` coordinates each) lies in the
/// closed supporting half-space of the gauge body at `-u`, translated to
/// `apex`.
pub fn half_space_empty_points(
    points: &[f64],
    dim: usize,
    apex: &[f64],
    u: &[f64],
    gauge: &GaugeBody,
) -> Result<bool, GeometryError> {
    let n = supporting_halfspace_normal(gauge, u)?;
    for p in points.chunks_exact(dim) {
        let s: f64 = (0..dim).map(|k| n[k] * (p[k] - apex[k])).sum();
        if s <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Ball-grain variant: a ball hits the half-space iff its center is within
/// its radius of it.
pub fn half_space_empty_balls(
    centers: &[f64],
    radii: &[f64],
    dim: usize,
    apex: &[f64],
    u: &[f64],
    gauge: &GaugeBody,
) -> Result<bool, GeometryError> {
    let n = supporting_halfspace_normal(gauge, u)?;
    for (c, &r) in centers.chunks_exact(dim).zip(radii) {
        let s: f64 = (0..dim).map(|k| n[k] * (c[k] - apex[k])).sum();
        if s <= r {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The shrinking inequality behind the spread-out cluster comparison: scaling
/// a finite pattern toward one of its points by `w <= 1` can only make the
/// dilated test set harder to avoid.
///
/// Returns `(lhs, rhs)`, the emptiness indicators of the shrunk and original
/// patterns; the contract is `lhs <= rhs`. `u` must lie on the boundary of
/// the reflected body (checked to 1e-9).
pub fn shrink_preserves_emptiness(
    psi: &[f64],
    dim: usize,
    w: f64,
    index: usize,
    t: f64,
    u: &[f64],
    gauge: &GaugeBody,
) -> Result<(bool, bool), GeometryError> {
    let g = gauge.gauge_reflected(u);
    if !((g - 1.0).abs() <= 1e-9) {
        return Err(GeometryError::NotOnBoundary { gauge: g });
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(GeometryError::InvalidShape(format!(
            "shrink factor must lie in [0, 1], got {w}"
        )));
    }
    let count = psi.len() / dim;
    assert!(index < count, "index out of range");
    let xi = &psi[index * dim..(index + 1) * dim];

    let mut offset = vec![0.0; dim];
    let mut in_test_set = |scale: f64| -> bool {
        for (j, p) in psi.chunks_exact(dim).enumerate() {
            if j == index {
                continue;
            }
            // offset = scale * (x_j - x_i) - t u; membership in tB is a gauge test.
            for k in 0..dim {
                offset[k] = scale * (p[k] - xi[k]) - t * u[k];
            }
            let hit = if t == 0.0 {
                offset.iter().all(|v| *v == 0.0)
            } else {
                gauge.gauge(&offset) <= t
            };
            if hit {
                return true;
            }
        }
        false
    };

    let lhs = !in_test_set(w);
    let rhs = !in_test_set(1.0);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn ball_halfspace_normal_is_minus_direction() {
        let ball = GaugeBody::unit_ball(2);
        let n = supporting_halfspace_normal(&ball, &[0.0, 1.0]).unwrap();
        assert!((n[0]).abs() < 1e-12 && (n[1] + 1.0).abs() < 1e-12);
        assert!(supporting_halfspace_normal(&ball, &[0.0, 0.5]).is_err());
    }

    #[test]
    fn box_corner_direction_is_non_regular() {
        let bx = GaugeBody::boxed(vec![1.0, 1.0]).unwrap();
        assert!(supporting_halfspace_normal(&bx, &[1.0, 1.0]).is_err());
        let n = supporting_halfspace_normal(&bx, &[1.0, 0.2]).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);
    }

    #[test]
    fn half_space_membership_examples() {
        let ball = GaugeBody::unit_ball(2);
        let u = [1.0, 0.0];
        // Empty set.
        assert!(half_space_empty_points(&[], 2, &[0.0, 0.0], &u, &ball).unwrap());
        // T(B, -u) = {v : u . v >= 0}: a point with positive u-component is inside.
        assert!(!half_space_empty_points(&[2.0, 0.5], 2, &[0.0, 0.0], &u, &ball).unwrap());
        assert!(half_space_empty_points(&[-2.0, 0.5], 2, &[0.0, 0.0], &u, &ball).unwrap());
        // Ball variant: center behind the hyperplane but radius reaches it.
        assert!(
            !half_space_empty_balls(&[-0.5, 0.0], &[1.0], 2, &[0.0, 0.0], &u, &ball).unwrap()
        );
    }

    #[test]
    fn shrink_concrete_example() {
        let ball = GaugeBody::unit_ball(2);
        let psi = [0.0, 0.0, 2.0, 0.0];
        let (lhs, rhs) =
            shrink_preserves_emptiness(&psi, 2, 0.5, 0, 0.6, &[1.0, 0.0], &ball).unwrap();
        assert!(!lhs, "shrunk offset (1,0) lies inside B((0.6,0), 0.6)");
        assert!(rhs, "original offset (2,0) misses the test set");
    }

    #[test]
    fn shrink_identity_and_singleton() {
        let ball = GaugeBody::unit_ball(2);
        let psi = [0.0, 0.0, 1.0, 0.5];
        let (l, r) =
            shrink_preserves_emptiness(&psi, 2, 1.0, 1, 0.7, &[0.0, 1.0], &ball).unwrap();
        assert_eq!(l, r);
        let single = [0.3, 0.4];
        let (l, r) =
            shrink_preserves_emptiness(&single, 2, 0.2, 0, 2.0, &[0.0, 1.0], &ball).unwrap();
        assert!(l && r);
    }

    #[test]
    fn shrink_rejects_interior_direction() {
        let ball = GaugeBody::unit_ball(2);
        let psi = [0.0, 0.0, 1.0, 0.0];
        assert!(
            shrink_preserves_emptiness(&psi, 2, 0.5, 0, 1.0, &[0.3, 0.0], &ball).is_err()
        );
    }

    #[test]
    fn shrink_inequality_holds_on_random_instances() {
        let bodies = [
            GaugeBody::unit_ball(2),
            GaugeBody::boxed(vec![1.0, 0.7]).unwrap(),
            GaugeBody::polygon(vec![[1.5, -0.5], [1.0, 1.0], [-1.0, 0.8], [-0.7, -0.9]]).unwrap(),
        ];
        let mut rng = stream_rng(17, 0);
        let mut dir = Vec::new();
        for trial in 0..10_000 {
            let gauge = &bodies[trial % bodies.len()];
            let n = rng.random_range(1..6usize);
            let mut psi = Vec::with_capacity(2 * n);
            for _ in 0..2 * n {
                psi.push(rng.random_range(-3.0..3.0));
            }
            let w = rng.random_range(0.0..=1.0);
            let index = rng.random_range(0..n);
            let t = rng.random_range(0.0..2.5);
            super::super::nu::sample_direction(
                gauge,
                &crate::geometry::DirectionSectors::Full,
                &mut rng,
                &mut dir,
            );
            let (lhs, rhs) =
                shrink_preserves_emptiness(&psi, 2, w, index, t, &dir, gauge).unwrap();
            assert!(
                lhs <= rhs,
                "violation: trial {trial}, lhs {lhs} rhs {rhs} (w={w}, t={t})"
            );
        }
    }
}
