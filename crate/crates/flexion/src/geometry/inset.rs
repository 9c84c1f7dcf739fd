//! Uniform inward offsetting of polygon outlines, modeling material removed
//! by a manufacturing tolerance.

use crate::error::GeometryError;
use crate::geometry::polygon::Polygon;

/// Shrink a polygon by moving every edge inward by `t` along its outward
/// normal and re-intersecting adjacent offset edge lines.
///
/// `t = 0` returns the polygon unchanged. The offset fails when the shape
/// collapses: an edge direction flips, the outline self-intersects, or the
/// area vanishes.
pub fn inset_polygon(polygon: &Polygon, t: f64) -> Result<Polygon, GeometryError> {
    if !t.is_finite() || t < 0.0 {
        return Err(GeometryError::BadInset(t));
    }
    if t == 0.0 {
        return Ok(polygon.clone());
    }
    let n = polygon.vertex_count();
    let mut shifted = Vec::with_capacity(n);
    for v in 0..n {
        let e_in = polygon.edge(polygon.edge_into(v));
        let e_out = polygon.edge(polygon.edge_out(v));
        // Offset lines: anchor moved inward, direction unchanged.
        let a_in = polygon.vertex(e_in.e0) - e_in.normal * t;
        let a_out = polygon.vertex(e_out.e0) - e_out.normal * t;
        let denom = e_in.direction.cross(e_out.direction);
        if denom.abs() <= 1e-9 {
            if e_in.direction.dot(e_out.direction) < 0.0 {
                // A hairpin corner has no meaningful offset intersection.
                return Err(GeometryError::InsetCollapse {
                    inset: t,
                    vertex: v,
                });
            }
            // Collinear edges: both offset lines coincide, shift the vertex.
            shifted.push(polygon.vertex(v) - e_out.normal * t);
            continue;
        }
        // Solve a_in + s * d_in = a_out + u * d_out for the corner point.
        let s = (a_out - a_in).cross(e_out.direction) / denom;
        shifted.push(a_in + e_in.direction * s);
    }

    let result = Polygon::new(shifted).map_err(|_| GeometryError::InsetCollapse {
        inset: t,
        vertex: 0,
    })?;
    for e in 0..n {
        // A short edge can vanish and reappear reversed; that is a collapse
        // even when the outline stays simple.
        if result.edge(e).direction.dot(polygon.edge(e).direction) <= 0.0 {
            return Err(GeometryError::InsetCollapse {
                inset: t,
                vertex: e,
            });
        }
    }
    if result.area() >= polygon.area() {
        return Err(GeometryError::InsetCollapse {
            inset: t,
            vertex: 0,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::Vec2;

    #[test]
    fn zero_inset_is_identity() {
        let p = Polygon::unit_square();
        let q = inset_polygon(&p, 0.0).unwrap();
        for i in 0..4 {
            assert_eq!(p.vertex(i), q.vertex(i));
        }
    }

    #[test]
    fn square_inset_shrinks_exactly() {
        let p = Polygon::unit_square();
        let q = inset_polygon(&p, 0.1).unwrap();
        assert!((q.vertex(0) - Vec2::new(0.1, 0.1)).norm() < 1e-12);
        assert!((q.area() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn l_shape_area_loss_tracks_perimeter() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ])
        .unwrap();
        let t = 1e-3;
        let q = inset_polygon(&p, t).unwrap();
        let loss = p.area() - q.area();
        let expected = p.perimeter() * t;
        assert!(
            loss > 0.9 * expected && loss < 1.1 * expected,
            "loss {loss}"
        );
        // The concave corner moves outward relative to its neighbors, so
        // vertex 3 shifts toward the interior notch.
        assert!((q.vertex(3) - Vec2::new(1.0 - t, 1.0 - t)).norm() < 1e-9);
    }

    #[test]
    fn oversized_inset_collapses() {
        let p = Polygon::unit_square();
        assert!(matches!(
            inset_polygon(&p, 0.6),
            Err(GeometryError::InsetCollapse { .. })
        ));
    }

    #[test]
    fn negative_inset_is_rejected() {
        let p = Polygon::unit_square();
        assert!(matches!(
            inset_polygon(&p, -0.1),
            Err(GeometryError::BadInset(_))
        ));
    }

    #[test]
    fn collinear_flat_vertex_offsets_cleanly() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ])
        .unwrap();
        let q = inset_polygon(&p, 0.25).unwrap();
        assert!((q.vertex(1) - Vec2::new(1.0, 0.25)).norm() < 1e-12);
    }
}
