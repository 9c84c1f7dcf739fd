//! Near-contact selection: which (edge, vertex) pairs are close enough to
//! constrain each other, and what corner context they carry.

use crate::constraints::{orient_pair, AssembleOptions, ConstraintPair, ContactKind};
use crate::error::SceneError;
use crate::geometry::overlap::{bounding_box, boxes_touch, interior_depth, scene_overlap};
use crate::geometry::Scene;
use crate::vec2::Vec2;

/// A raw near-contact found by the geometric sweep, before corner
/// orientation. `corner` is set when the vertex projects into the corner
/// zone at either end of the edge (within epsilon of the endpoint), naming
/// the edge-body vertex at that end.
#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub edge_body: usize,
    pub edge: usize,
    pub vertex_body: usize,
    pub vertex: usize,
    pub corner: Option<usize>,
}

/// Select and orient all constraint pairs at strict tolerances.
pub fn select_pairs(scene: &Scene) -> Result<Vec<ConstraintPair>, SceneError> {
    select_pairs_with(scene, &AssembleOptions::default())
}

pub fn select_pairs_with(
    scene: &Scene,
    options: &AssembleOptions,
) -> Result<Vec<ConstraintPair>, SceneError> {
    check_clearance(scene, options.penetration_allowance)?;

    // The gate is a closed interval with rounding dust absorbed: a wall
    // placed exactly epsilon away must still produce its rows even when the
    // coordinate arithmetic lands a few ulps past epsilon.
    let eps = scene.epsilon + 1e-9;
    let outlines: Vec<Vec<Vec2>> = scene.bodies.iter().map(|b| b.world_vertices()).collect();
    let boxes: Vec<_> = outlines.iter().map(|o| bounding_box(o)).collect();
    let n = scene.bodies.len();
    let mut pairs: Vec<ConstraintPair> = Vec::new();

    for a in 0..n {
        for b in 0..n {
            if a == b || (scene.bodies[a].fixed && scene.bodies[b].fixed) {
                continue;
            }
            if !boxes_touch(boxes[a], boxes[b], eps) {
                continue;
            }
            let host = &scene.bodies[a];
            for e in 0..host.polygon.edge_count() {
                let geom = host.polygon.edge(e);
                let normal = host.pose.rotate_dir(geom.normal);
                let direction = host.pose.rotate_dir(geom.direction);
                let origin = outlines[a][geom.e0];
                let len = geom.length;
                for (v, &p) in outlines[b].iter().enumerate() {
                    let d = normal.dot(p - origin);
                    if d > eps || d < -eps {
                        continue;
                    }
                    let t = (p - origin).dot(direction);
                    if t < -eps || t > len + eps {
                        continue;
                    }
                    let near_start = t < eps;
                    let near_end = t > len - eps;
                    let corner = match (near_start, near_end) {
                        (true, true) => Some(if t < 0.5 * len { geom.e0 } else { geom.e1 }),
                        (true, false) => Some(geom.e0),
                        (false, true) => Some(geom.e1),
                        (false, false) => None,
                    };
                    let candidate = Candidate {
                        edge_body: a,
                        edge: e,
                        vertex_body: b,
                        vertex: v,
                        corner,
                    };
                    if options.corner_rows {
                        pairs.extend(orient_pair(scene, &candidate));
                    } else {
                        pairs.push(ConstraintPair {
                            edge_body: a,
                            vertex_body: b,
                            vertex: v,
                            contact: ContactKind::Edge { edge: e },
                        });
                    }
                }
            }
        }
    }

    pairs.sort_unstable_by_key(|p| p.sort_key());
    pairs.dedup();
    Ok(pairs)
}

/// Error out when any body penetrates another deeper than `allowance`.
/// An infinite allowance turns the check off (measurement passes over
/// disturbed configurations). Pairs of fixed bodies are exempt: a fixed
/// frame may be modeled from overlapping slabs.
pub fn check_clearance(scene: &Scene, allowance: f64) -> Result<(), SceneError> {
    if allowance.is_infinite() {
        return Ok(());
    }
    let outlines: Vec<Vec<Vec2>> = scene.bodies.iter().map(|b| b.world_vertices()).collect();
    let boxes: Vec<_> = outlines.iter().map(|o| bounding_box(o)).collect();
    let n = scene.bodies.len();
    for a in 0..n {
        for b in 0..n {
            if a == b || (scene.bodies[a].fixed && scene.bodies[b].fixed) {
                continue;
            }
            if !boxes_touch(boxes[a], boxes[b], 0.0) {
                continue;
            }
            for (v, &p) in outlines[b].iter().enumerate() {
                let depth = interior_depth(&outlines[a], p);
                if depth > allowance {
                    return Err(SceneError::Penetration {
                        edge_body: scene.bodies[a].name.clone(),
                        vertex_body: scene.bodies[b].name.clone(),
                        vertex: v,
                        depth,
                    });
                }
            }
        }
    }
    // Vertex scans miss crossing-only overlap (bars crossing mid-edge);
    // the interval-probing sweep catches those.
    if let Some((a, b, depth)) = scene_overlap(scene, allowance) {
        return Err(SceneError::Overlap {
            a: scene.bodies[a].name.clone(),
            b: scene.bodies[b].name.clone(),
            depth,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Body, Polygon, Pose};

    /// An L whose notch corner sits at (1, 1), lower arm along y in [0, 1]
    /// for x in [1, 2], upright arm along x in [0, 1] up to y = 3.
    fn l_and_square() -> Scene {
        let l_shape = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 3.0),
            Vec2::new(0.0, 3.0),
        ])
        .unwrap();
        Scene::new(
            vec![
                Body::new("l", l_shape, Pose::IDENTITY, false),
                Body::new(
                    "block",
                    Polygon::unit_square(),
                    Pose::new(1.02, 1.02, 0.0),
                    false,
                ),
            ],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn concave_corner_supplies_plain_edge_rows() {
        let scene = l_and_square();
        let pairs = select_pairs(&scene).unwrap();
        let edge_rows: Vec<_> = pairs
            .iter()
            .filter(|p| matches!(p.contact, ContactKind::Edge { .. }))
            .collect();
        let corner_rows: Vec<_> = pairs
            .iter()
            .filter(|p| matches!(p.contact, ContactKind::Corner { .. }))
            .collect();
        // Notch contact: the L hosts plain rows for both edges meeting its
        // concave corner plus the long inner wall against the block's upper
        // left corner. The block's far bottom-right corner also meets the
        // L's convex outer corner, giving one averaged row per host.
        assert_eq!(edge_rows.len(), 3, "pairs: {pairs:?}");
        assert!(edge_rows.iter().all(|p| p.edge_body == 0));
        assert_eq!(corner_rows.len(), 2, "pairs: {pairs:?}");
        let hosts: Vec<usize> = corner_rows.iter().map(|p| p.edge_body).collect();
        assert!(hosts.contains(&0) && hosts.contains(&1));
    }

    #[test]
    fn corner_handling_off_leaves_raw_edge_rows() {
        let scene = l_and_square();
        let opts = AssembleOptions {
            corner_rows: false,
            ..AssembleOptions::default()
        };
        let pairs = select_pairs_with(&scene, &opts).unwrap();
        assert!(pairs
            .iter()
            .all(|p| matches!(p.contact, ContactKind::Edge { .. })));
        // Raw rows include hosts on both bodies.
        assert!(pairs.iter().any(|p| p.edge_body == 1));
    }

    #[test]
    fn far_bodies_make_no_pairs() {
        let scene = Scene::new(
            vec![
                Body::new("a", Polygon::unit_square(), Pose::IDENTITY, false),
                Body::new("b", Polygon::unit_square(), Pose::new(5.0, 0.0, 0.0), false),
            ],
            0.1,
        )
        .unwrap();
        assert!(select_pairs(&scene).unwrap().is_empty());
    }

    #[test]
    fn fixed_pairs_are_skipped() {
        let mut scene = l_and_square();
        scene.bodies[0].fixed = true;
        scene.bodies[1].fixed = true;
        assert!(select_pairs(&scene).unwrap().is_empty());
    }
}
