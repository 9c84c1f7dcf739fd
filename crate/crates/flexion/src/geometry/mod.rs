pub mod inset;
pub mod overlap;
pub mod polygon;
pub mod select;
pub mod visibility;

pub use inset::inset_polygon;
pub use overlap::{overlap_depth, polygons_overlap, scene_overlap};
pub use polygon::{signed_area, CornerKind, EdgeGeom, PolarVertex, Polygon};
pub use select::{check_clearance, select_pairs};
pub use visibility::{mutually_visible_pairs, VertexRef};

use crate::error::SceneError;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Rigid placement of a body: translation (x, y) and rotation theta in
/// radians, applied as p_world = t + R(theta) p_local.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Pose {
        Pose { x, y, theta }
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        self.translation() + p.rotated(self.theta)
    }

    pub fn rotate_dir(&self, d: Vec2) -> Vec2 {
        d.rotated(self.theta)
    }
}

/// A rigid polygon placed in the scene. Fixed bodies contribute constraint
/// geometry but no degrees of freedom.
#[derive(Clone, Debug)]
pub struct Body {
    pub name: String,
    pub polygon: Polygon,
    pub pose: Pose,
    pub fixed: bool,
}

impl Body {
    pub fn new(name: impl Into<String>, polygon: Polygon, pose: Pose, fixed: bool) -> Body {
        Body {
            name: name.into(),
            polygon,
            pose,
            fixed,
        }
    }

    /// World position of vertex `i`, evaluated through the polar form so it
    /// matches the expression the constraint gradients differentiate.
    pub fn world_vertex(&self, i: usize) -> Vec2 {
        world_vertex(self, i)
    }

    pub fn world_vertices(&self) -> Vec<Vec2> {
        (0..self.polygon.vertex_count())
            .map(|i| world_vertex(self, i))
            .collect()
    }

    pub fn world_centroid(&self) -> Vec2 {
        self.pose.transform_point(self.polygon.centroid())
    }
}

/// An ordered collection of bodies plus the interaction distance epsilon:
/// vertices within epsilon of a facing edge are considered in contact and
/// generate constraints.
#[derive(Clone, Debug)]
pub struct Scene {
    pub bodies: Vec<Body>,
    pub epsilon: f64,
}

impl Scene {
    pub fn new(bodies: Vec<Body>, epsilon: f64) -> Result<Scene, SceneError> {
        if bodies.is_empty() {
            return Err(SceneError::Empty);
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(SceneError::BadEpsilon(epsilon));
        }
        let mut seen = HashSet::new();
        for b in &bodies {
            if !seen.insert(b.name.clone()) {
                return Err(SceneError::DuplicateName(b.name.clone()));
            }
        }
        Ok(Scene { bodies, epsilon })
    }

    pub fn body(&self, i: usize) -> &Body {
        &self.bodies[i]
    }

    pub fn find_body(&self, name: &str) -> Option<usize> {
        self.bodies.iter().position(|b| b.name == name)
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.bodies.len())
            .filter(|&i| !self.bodies[i].fixed)
            .collect()
    }

    /// Diagonal of the world-space bounding box over all vertices; used to
    /// scale convergence thresholds.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for b in &self.bodies {
            for i in 0..b.polygon.vertex_count() {
                let w = b.world_vertex(i);
                lo = Vec2::new(lo.x.min(w.x), lo.y.min(w.y));
                hi = Vec2::new(hi.x.max(w.x), hi.y.max(w.y));
            }
        }
        (hi - lo).norm()
    }

    /// Copy of the scene with every pose replaced; panics when lengths differ.
    pub fn with_poses(&self, poses: &[Pose]) -> Scene {
        assert_eq!(poses.len(), self.bodies.len(), "pose count mismatch");
        let mut out = self.clone();
        for (b, p) in out.bodies.iter_mut().zip(poses) {
            b.pose = *p;
        }
        out
    }

    pub fn poses(&self) -> Vec<Pose> {
        self.bodies.iter().map(|b| b.pose).collect()
    }
}

/// World position of a body vertex through the polar form:
/// (x + r cos(theta + alpha), y + r sin(theta + alpha)).
pub fn world_vertex(body: &Body, vertex: usize) -> Vec2 {
    let pv = body.polygon.polar(vertex);
    let a = body.pose.theta + pv.alpha;
    Vec2::new(body.pose.x + pv.r * a.cos(), body.pose.y + pv.r * a.sin())
}

/// Unit outward normal of a body edge in world coordinates, written in the
/// polar form of the two endpoints. Equal to the local edge normal rotated
/// by the body angle.
pub fn edge_normal(body: &Body, edge: usize) -> Vec2 {
    let e = body.polygon.edge(edge);
    let p0 = body.polygon.polar(e.e0);
    let p1 = body.polygon.polar(e.e1);
    let (s0, c0) = (body.pose.theta + p0.alpha).sin_cos();
    let (s1, c1) = (body.pose.theta + p1.alpha).sin_cos();
    let inv_len = 1.0 / e.length;
    Vec2::new(
        inv_len * (p1.r * s1 - p0.r * s0),
        inv_len * (-p1.r * c1 + p0.r * c0),
    )
}

/// Signed distance of a vertex of one body from the supporting line of an
/// edge of another: positive on the outward side, negative behind the edge.
/// The anchor is the world position of the edge's first endpoint.
pub fn signed_distance(edge_body: &Body, edge: usize, vertex_body: &Body, vertex: usize) -> f64 {
    let n = edge_normal(edge_body, edge);
    let o = world_vertex(edge_body, edge_body.polygon.edge(edge).e0);
    let p = world_vertex(vertex_body, vertex);
    n.dot(p - o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn body_at(pose: Pose) -> Body {
        Body::new("b", Polygon::unit_square(), pose, false)
    }

    #[test]
    fn world_vertex_matches_cartesian_transform() {
        let b = body_at(Pose::new(1.5, -2.0, 0.7));
        for i in 0..4 {
            let via_polar = b.world_vertex(i);
            let via_cartesian = b.pose.transform_point(b.polygon.vertex(i));
            assert!((via_polar - via_cartesian).norm() < 1e-12);
        }
    }

    #[test]
    fn edge_normal_matches_rotated_local_normal() {
        let b = body_at(Pose::new(-0.3, 0.9, 2.1));
        for e in 0..4 {
            let via_polar = edge_normal(&b, e);
            let via_rotation = b.pose.rotate_dir(b.polygon.edge(e).normal);
            assert!((via_polar - via_rotation).norm() < 1e-12);
            assert!((via_polar.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_distance_across_a_gap() {
        let left = Body::new("left", Polygon::unit_square(), Pose::IDENTITY, false);
        let right = Body::new(
            "right",
            Polygon::unit_square(),
            Pose::new(1.25, 0.0, 0.0),
            false,
        );
        // Left square's right edge is edge 1 (from (1,0) to (1,1)).
        let d = signed_distance(&left, 1, &right, 0);
        assert!((d - 0.25).abs() < 1e-12);
        // A vertex behind the edge line reads negative.
        let d_inside = signed_distance(&right, 3, &left, 0);
        // Right square's left edge faces -x; left square's origin is 1.25 in front.
        assert!((d_inside - 1.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn signed_distance_is_rigid_invariant(
            dx in -3.0..3.0f64, dy in -3.0..3.0f64, rot in -3.0..3.0f64,
        ) {
            let a = Body::new("a", Polygon::unit_square(), Pose::new(0.1, 0.2, 0.3), false);
            let b = Body::new("b", Polygon::unit_square(), Pose::new(1.4, -0.2, -0.5), false);
            let d_before = signed_distance(&a, 1, &b, 0);

            // Move both bodies by the same rigid motion about the origin.
            let shift = |p: &Pose| {
                let t = p.translation().rotated(rot) + Vec2::new(dx, dy);
                Pose::new(t.x, t.y, p.theta + rot)
            };
            let a2 = Body { pose: shift(&a.pose), ..a.clone() };
            let b2 = Body { pose: shift(&b.pose), ..b.clone() };
            let d_after = signed_distance(&a2, 1, &b2, 0);
            prop_assert!((d_before - d_after).abs() < 1e-9);
        }
    }
}
