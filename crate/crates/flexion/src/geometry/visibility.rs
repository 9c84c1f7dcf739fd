//! Line-of-sight queries between body vertices, used to propose bracing
//! locations between parts of an assembly.

use crate::geometry::overlap::{boundary_crossings, interior_depth};
use crate::geometry::Scene;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Reference to one vertex of one body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRef {
    pub body: usize,
    pub vertex: usize,
}

/// All vertex pairs on distinct bodies whose connecting segment is not
/// blocked by any third body.
///
/// Only bodies other than the two endpoint owners act as occluders: a beam
/// anchored at a vertex may hug or cross its own body, so self-occlusion is
/// not meaningful for this query.
pub fn mutually_visible_pairs(scene: &Scene) -> Vec<(VertexRef, VertexRef)> {
    let outlines: Vec<Vec<Vec2>> = scene.bodies.iter().map(|b| b.world_vertices()).collect();
    let mut out = Vec::new();
    for i in 0..scene.bodies.len() {
        for j in (i + 1)..scene.bodies.len() {
            for (vi, &a) in outlines[i].iter().enumerate() {
                for (vj, &b) in outlines[j].iter().enumerate() {
                    let blocked = (0..scene.bodies.len())
                        .filter(|&k| k != i && k != j)
                        .any(|k| segment_enters(&outlines[k], a, b));
                    if !blocked {
                        out.push((
                            VertexRef {
                                body: i,
                                vertex: vi,
                            },
                            VertexRef {
                                body: j,
                                vertex: vj,
                            },
                        ));
                    }
                }
            }
        }
    }
    out
}

/// True when any part of the open segment runs strictly inside the outline.
fn segment_enters(outline: &[Vec2], p0: Vec2, p1: Vec2) -> bool {
    let mut ts = vec![0.0];
    ts.extend(boundary_crossings(outline, p0, p1));
    ts.push(1.0);
    ts.windows(2).any(|w| {
        let mid = p0 + (p1 - p0) * (0.5 * (w[0] + w[1]));
        interior_depth(outline, mid) > 1e-9
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Body, Polygon, Pose};

    fn square_body(name: &str, x: f64) -> Body {
        Body::new(name, Polygon::unit_square(), Pose::new(x, 0.0, 0.0), false)
    }

    #[test]
    fn two_bodies_see_all_pairs() {
        let scene = Scene::new(vec![square_body("a", 0.0), square_body("b", 3.0)], 0.1).unwrap();
        // With no third body there is nothing to occlude, even for segments
        // that pass through the endpoint bodies themselves.
        assert_eq!(mutually_visible_pairs(&scene).len(), 16);
    }

    #[test]
    fn middle_body_occludes() {
        let scene = Scene::new(
            vec![
                square_body("a", 0.0),
                square_body("mid", 2.0),
                square_body("b", 4.0),
            ],
            0.1,
        )
        .unwrap();
        let pairs = mutually_visible_pairs(&scene);
        // A diagonal from a's bottom-right to b's top-left passes through
        // the interior of the middle square and must be gone.
        let a_br = VertexRef { body: 0, vertex: 1 }; // (1, 0)
        let b_tl = VertexRef { body: 2, vertex: 3 }; // (4, 1)
        assert!(!pairs.contains(&(a_br, b_tl)));
        // Top of a to top of b grazes the middle square's top edge; the
        // boundary itself does not block.
        let a_tr = VertexRef { body: 0, vertex: 2 }; // (1, 1)
        let b_tl2 = VertexRef { body: 2, vertex: 3 }; // (4, 1)
        assert!(pairs.contains(&(a_tr, b_tl2)));
        // Pairs between a and the middle body are unobstructed.
        assert!(pairs.contains(&(a_br, VertexRef { body: 1, vertex: 0 })));
    }
}
