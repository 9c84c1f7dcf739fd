//! Interior-overlap tests between world-space polygon outlines.
//!
//! These run on plain vertex slices because callers usually hold transformed
//! copies of body outlines rather than `Polygon` values. The depth numbers
//! are estimates good enough for validation thresholds: vertex containment
//! reports an exact interior depth, crossing-only overlap is probed at
//! clipped edge midpoints.

use crate::geometry::polygon::point_segment_distance;
use crate::geometry::Scene;
use crate::vec2::Vec2;

/// Even-odd containment test over a closed vertex loop.
pub fn point_in_vertices(vertices: &[Vec2], p: Vec2) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from `p` to the nearest point of the closed boundary.
pub fn distance_to_boundary(vertices: &[Vec2], p: Vec2) -> f64 {
    let n = vertices.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        best = best.min(point_segment_distance(
            p,
            vertices[i],
            vertices[(i + 1) % n],
        ));
    }
    best
}

/// Positive inside, negative outside, magnitude = distance to the boundary.
pub fn interior_depth(vertices: &[Vec2], p: Vec2) -> f64 {
    let d = distance_to_boundary(vertices, p);
    if point_in_vertices(vertices, p) {
        d
    } else {
        -d
    }
}

/// Parameters t in [0, 1] where the segment `p0 + t (p1 - p0)` crosses the
/// boundary, sorted ascending. Grazing contacts parallel to an edge are
/// skipped; interval-midpoint probing absorbs that.
pub(crate) fn boundary_crossings(vertices: &[Vec2], p0: Vec2, p1: Vec2) -> Vec<f64> {
    let d = p1 - p0;
    let n = vertices.len();
    let mut out = Vec::new();
    for i in 0..n {
        let a = vertices[i];
        let e = vertices[(i + 1) % n] - a;
        let denom = d.cross(e);
        if denom.abs() < 1e-15 {
            continue;
        }
        let t = (a - p0).cross(e) / denom;
        let u = (a - p0).cross(d) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            out.push(t);
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// True when the two outlines share interior deeper than `tol`.
pub fn polygons_overlap(a: &[Vec2], b: &[Vec2], tol: f64) -> bool {
    overlap_depth(a, b, tol).is_some()
}

/// Estimated interpenetration depth, or `None` when the interiors stay
/// disjoint within `tol`. Touching boundaries do not count as overlap.
pub fn overlap_depth(a: &[Vec2], b: &[Vec2], tol: f64) -> Option<f64> {
    let mut depth: f64 = 0.0;
    for &v in a {
        depth = depth.max(interior_depth(b, v));
    }
    for &v in b {
        depth = depth.max(interior_depth(a, v));
    }
    // Vertex burial alone underestimates crossing-dominated overlap: two
    // bars crossing mid-edge bury no vertex, and aligned boxes sliding
    // through each other keep every vertex grazing a boundary line. The
    // midpoints of clipped edge intervals see the true interior, so they
    // are probed unconditionally.
    for i in 0..a.len() {
        let p0 = a[i];
        let p1 = a[(i + 1) % a.len()];
        let mut ts = vec![0.0];
        ts.extend(boundary_crossings(b, p0, p1));
        ts.push(1.0);
        for w in ts.windows(2) {
            let mid = p0 + (p1 - p0) * (0.5 * (w[0] + w[1]));
            depth = depth.max(interior_depth(b, mid));
        }
    }
    if depth > tol {
        Some(depth)
    } else {
        None
    }
}

/// Worst interior overlap between scene bodies, skipping pairs where both
/// are fixed (a fixed frame may be modeled from overlapping slabs).
pub fn scene_overlap(scene: &Scene, tol: f64) -> Option<(usize, usize, f64)> {
    let outlines: Vec<Vec<Vec2>> = scene.bodies.iter().map(|b| b.world_vertices()).collect();
    let boxes: Vec<(Vec2, Vec2)> = outlines.iter().map(|o| bounding_box(o)).collect();
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..scene.bodies.len() {
        for j in (i + 1)..scene.bodies.len() {
            if scene.bodies[i].fixed && scene.bodies[j].fixed {
                continue;
            }
            if !boxes_touch(boxes[i], boxes[j], tol) {
                continue;
            }
            if let Some(d) = overlap_depth(&outlines[i], &outlines[j], tol) {
                if worst.is_none_or(|(_, _, w)| d > w) {
                    worst = Some((i, j, d));
                }
            }
        }
    }
    worst
}

pub(crate) fn bounding_box(vertices: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in vertices {
        lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    (lo, hi)
}

pub(crate) fn boxes_touch(a: (Vec2, Vec2), b: (Vec2, Vec2), margin: f64) -> bool {
    a.0.x - margin <= b.1.x
        && b.0.x - margin <= a.1.x
        && a.0.y - margin <= b.1.y
        && b.0.y - margin <= a.1.y
}
