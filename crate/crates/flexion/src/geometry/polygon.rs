use crate::error::GeometryError;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Tolerance on the cross product of adjacent unit edge directions below
/// which a corner counts as flat.
pub const FLAT_TOL: f64 = 1e-9;

/// Turn direction of the boundary at a vertex of a counterclockwise polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CornerKind {
    /// Boundary turns left; interior angle below pi.
    Convex,
    /// Boundary turns right; interior angle above pi (reflex).
    Concave,
    /// Adjacent edges are collinear within tolerance.
    Flat,
}

/// A vertex in polar form relative to the body origin: the world position
/// under pose (x, y, theta) is (x + r cos(theta + alpha), y + r sin(theta + alpha)).
#[derive(Clone, Copy, Debug)]
pub struct PolarVertex {
    pub r: f64,
    pub alpha: f64,
}

/// Precomputed per-edge geometry in body-local coordinates.
#[derive(Clone, Copy, Debug)]
pub struct EdgeGeom {
    /// Index of the edge's first vertex; the edge runs to vertex `e1`.
    pub e0: usize,
    pub e1: usize,
    pub length: f64,
    /// Unit direction from `e0` to `e1`.
    pub direction: Vec2,
    /// Unit outward normal (the boundary is counterclockwise, so the
    /// interior lies on the left of `direction`).
    pub normal: Vec2,
}

/// A simple polygon with counterclockwise boundary and positive area.
///
/// Construction validates the boundary and silently reverses clockwise
/// input. Vertices are cached in both Cartesian and polar form; the polar
/// form is what the constraint gradients differentiate.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    polar: Vec<PolarVertex>,
    edges: Vec<EdgeGeom>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Polygon, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let scale = vertices
            .iter()
            .map(|v| v.x.abs().max(v.y.abs()))
            .fold(1.0, f64::max);
        let n = vertices.len();
        for i in 0..n {
            let len = (vertices[(i + 1) % n] - vertices[i]).norm();
            if len <= 1e-12 * scale {
                return Err(GeometryError::ZeroLengthEdge(i));
            }
        }
        // Intersection before area: a bowtie's signed area can be zero, and
        // "self-intersecting" is the diagnosis that names the offense.
        if let Some((i, j)) = find_self_intersection(&vertices, scale) {
            return Err(GeometryError::SelfIntersecting(i, j));
        }
        let area = signed_area(&vertices);
        if area.abs() <= 1e-12 * scale * scale {
            return Err(GeometryError::ZeroArea);
        }
        if area < 0.0 {
            vertices.reverse();
        }

        let polar = vertices
            .iter()
            .map(|v| PolarVertex {
                r: v.norm(),
                alpha: v.y.atan2(v.x),
            })
            .collect();
        let edges = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let length = (b - a).norm();
                let direction = (b - a) * (1.0 / length);
                EdgeGeom {
                    e0: i,
                    e1: (i + 1) % n,
                    length,
                    direction,
                    normal: Vec2::new(direction.y, -direction.x),
                }
            })
            .collect();
        Ok(Polygon {
            vertices,
            polar,
            edges,
        })
    }

    /// Axis-aligned unit square with corner at the origin; handy in tests.
    pub fn unit_square() -> Polygon {
        Polygon::rectangle(Vec2::ZERO, Vec2::new(1.0, 1.0))
    }

    /// Axis-aligned rectangle spanning `lo` to `hi`. Panics if degenerate.
    pub fn rectangle(lo: Vec2, hi: Vec2) -> Polygon {
        Polygon::new(vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)])
            .expect("rectangle corners must span a nonzero area")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i]
    }

    pub fn polar(&self, i: usize) -> PolarVertex {
        self.polar[i]
    }

    pub fn edge(&self, i: usize) -> &EdgeGeom {
        &self.edges[i]
    }

    /// Edge arriving at vertex `v` (the one whose second endpoint is `v`).
    pub fn edge_into(&self, v: usize) -> usize {
        (v + self.vertices.len() - 1) % self.vertices.len()
    }

    /// Edge leaving vertex `v` (edges are indexed by their first endpoint).
    pub fn edge_out(&self, v: usize) -> usize {
        v
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let mut acc = Vec2::ZERO;
        let mut area6 = 0.0;
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a.cross(b);
            acc += (a + b) * w;
            area6 += w;
        }
        acc * (1.0 / (3.0 * area6))
    }

    pub fn classify_corner(&self, v: usize) -> CornerKind {
        let din = self.edges[self.edge_into(v)].direction;
        let dout = self.edges[self.edge_out(v)].direction;
        let turn = din.cross(dout);
        if turn.abs() <= FLAT_TOL {
            CornerKind::Flat
        } else if turn > 0.0 {
            CornerKind::Convex
        } else {
            CornerKind::Concave
        }
    }

    /// Even-odd containment test. Points exactly on the boundary land on
    /// either side; callers that care pair this with `boundary_distance`.
    pub fn contains(&self, p: Vec2) -> bool {
        crate::geometry::overlap::point_in_vertices(&self.vertices, p)
    }

    /// Distance from `p` to the nearest point of the boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        crate::geometry::overlap::distance_to_boundary(&self.vertices, p)
    }

    /// Positive inside the polygon, negative outside; magnitude is the
    /// distance to the boundary.
    pub fn interior_depth(&self, p: Vec2) -> f64 {
        crate::geometry::overlap::interior_depth(&self.vertices, p)
    }
}

/// Twice the usual shoelace sum halved: positive for counterclockwise order.
pub fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn find_self_intersection(vertices: &[Vec2], scale: f64) -> Option<(usize, usize)> {
    let n = vertices.len();
    let tol = 1e-12 * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            // Adjacent edges share an endpoint by construction.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_touch(a, b, c, d, tol) {
                return Some((i, j));
            }
        }
    }
    None
}

/// True when the closed segments come within `tol` of each other.
fn segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2, tol: f64) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol
        || point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> Polygon {
        Polygon::unit_square()
    }

    #[test]
    fn unit_square_basics() {
        let p = square();
        assert_eq!(p.vertex_count(), 4);
        assert!((p.area() - 1.0).abs() < 1e-15);
        assert!((p.perimeter() - 4.0).abs() < 1e-15);
        let c = p.centroid();
        assert!((c - Vec2::new(0.5, 0.5)).norm() < 1e-15);
        for v in 0..4 {
            assert_eq!(p.classify_corner(v), CornerKind::Convex);
        }
    }

    #[test]
    fn outward_normals_point_away_from_interior() {
        let p = square();
        let c = p.centroid();
        for i in 0..p.edge_count() {
            let e = p.edge(i);
            let mid = (p.vertex(e.e0) + p.vertex(e.e1)) * 0.5;
            assert!(e.normal.dot(mid - c) > 0.0, "edge {i} normal flipped");
        }
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let ccw = square();
        let cw = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(cw.area() > 0.0);
        assert!((cw.area() - ccw.area()).abs() < 1e-15);
    }

    #[test]
    fn l_shape_has_one_concave_corner() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ])
        .unwrap();
        let kinds: Vec<CornerKind> = (0..6).map(|v| p.classify_corner(v)).collect();
        assert_eq!(
            kinds.iter().filter(|k| **k == CornerKind::Concave).count(),
            1
        );
        assert_eq!(p.classify_corner(3), CornerKind::Concave);
    }

    #[test]
    fn collinear_vertex_is_flat() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.classify_corner(1), CornerKind::Flat);
        assert_eq!(p.classify_corner(2), CornerKind::Convex);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(GeometryError::SelfIntersecting(_, _))));
    }

    #[test]
    fn repeated_vertex_is_rejected() {
        let r = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(GeometryError::ZeroLengthEdge(1))));
    }

    #[test]
    fn containment_and_depth() {
        let p = square();
        assert!(p.contains(Vec2::new(0.5, 0.5)));
        assert!(!p.contains(Vec2::new(1.5, 0.5)));
        assert!((p.interior_depth(Vec2::new(0.5, 0.5)) - 0.5).abs() < 1e-15);
        assert!((p.interior_depth(Vec2::new(2.0, 0.5)) + 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn polar_form_reproduces_vertices(
            coords in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 3)
        ) {
            let tri: Vec<Vec2> = coords.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            if let Ok(p) = Polygon::new(tri) {
                for i in 0..p.vertex_count() {
                    let v = p.vertex(i);
                    let pv = p.polar(i);
                    let back = Vec2::new(pv.r * pv.alpha.cos(), pv.r * pv.alpha.sin());
                    prop_assert!((back - v).norm() <= 1e-12 * (1.0 + v.norm()));
                }
            }
        }

        #[test]
        fn regular_polygons_are_all_convex(n in 3usize..12) {
            let verts: Vec<Vec2> = (0..n)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    Vec2::new(a.cos(), a.sin())
                })
                .collect();
            let p = Polygon::new(verts).unwrap();
            for v in 0..n {
                prop_assert_eq!(p.classify_corner(v), CornerKind::Convex);
            }
        }
    }
}
