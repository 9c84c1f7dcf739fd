//! Linearized non-penetration constraints.
//!
//! Contact selection produces vertex-against-edge pairs; every pair turns
//! into one linear row J dq + d0 >= 0 over the stacked per-body
//! displacements dq = (dx, dy, dtheta) of the free bodies. The union of
//! rows is the constraint polyhedron the LP layer optimizes over.

pub mod row;
pub mod sparse;

pub use row::{eval_half_plane, HalfPlane, RowEval};
pub use sparse::SparseMatrix;

use crate::error::{ConstraintError, FlexError};
use crate::geometry::select::select_pairs_with;
use crate::geometry::{CornerKind, Scene};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Tolerance below which two adjacent edge normals are treated as opposed
/// and their average as degenerate.
pub const DEGENERATE_NORMAL_TOL: f64 = 1e-9;

/// Hairline-negative distances in [-PENETRATION_TOL, 0) are rounded up to
/// zero; deeper initial penetration is a modeling error.
pub const PENETRATION_TOL: f64 = 1e-9;

/// What feature of the host body carries the separating line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactKind {
    /// The supporting line of one polygon edge.
    Edge { edge: usize },
    /// The averaged-normal line through a convex corner; relaxes the
    /// over-tight pair of edge rows that would otherwise pin the corner.
    Corner { corner: usize },
}

/// One selected contact: a feature of `edge_body` constrains vertex
/// `vertex` of `vertex_body` to its outward side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintPair {
    pub edge_body: usize,
    pub vertex_body: usize,
    pub vertex: usize,
    pub contact: ContactKind,
}

impl ConstraintPair {
    /// Total order used for deterministic output and deduplication.
    pub fn sort_key(&self) -> (usize, u8, usize, usize, usize) {
        let (tag, idx) = match self.contact {
            ContactKind::Edge { edge } => (0u8, edge),
            ContactKind::Corner { corner } => (1u8, corner),
        };
        (self.edge_body, tag, idx, self.vertex_body, self.vertex)
    }
}

/// Mapping from scene bodies to LP columns: three columns per free body in
/// scene order, fixed bodies absent.
#[derive(Clone, Debug)]
pub struct FreeMap {
    block_of: Vec<Option<usize>>,
    bodies: Vec<usize>,
}

impl FreeMap {
    pub fn new(scene: &Scene) -> FreeMap {
        let mut block_of = vec![None; scene.bodies.len()];
        let mut bodies = Vec::new();
        for (i, b) in scene.bodies.iter().enumerate() {
            if !b.fixed {
                block_of[i] = Some(bodies.len());
                bodies.push(i);
            }
        }
        FreeMap { block_of, bodies }
    }

    pub fn ncols(&self) -> usize {
        3 * self.bodies.len()
    }

    pub fn free_count(&self) -> usize {
        self.bodies.len()
    }

    /// Column block of a body: columns 3b, 3b+1, 3b+2. None when fixed.
    pub fn block(&self, body: usize) -> Option<usize> {
        self.block_of[body]
    }

    pub fn body_of_block(&self, block: usize) -> usize {
        self.bodies[block]
    }

    pub fn free_bodies(&self) -> &[usize] {
        &self.bodies
    }
}

/// The assembled linearization at one configuration: row metadata, current
/// distances d0, and the sparse gradient matrix.
#[derive(Clone, Debug)]
pub struct DistanceSystem {
    pub pairs: Vec<ConstraintPair>,
    pub d0: Vec<f64>,
    pub jacobian: SparseMatrix,
    pub free: FreeMap,
    pub epsilon: f64,
}

impl DistanceSystem {
    pub fn nrows(&self) -> usize {
        self.d0.len()
    }

    pub fn ncols(&self) -> usize {
        self.jacobian.ncols()
    }

    /// Residuals J dq + d0 of a candidate displacement.
    pub fn residuals(&self, dq: &[f64]) -> Vec<f64> {
        let mut r = self.jacobian.apply(dq);
        for (ri, d) in r.iter_mut().zip(&self.d0) {
            *ri += d;
        }
        r
    }

    pub fn min_residual(&self, dq: &[f64]) -> f64 {
        self.residuals(dq).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Knobs for contact selection and assembly. The defaults are the strict
/// settings used on freshly loaded scenes; the stepper widens the
/// penetration allowance to its per-step violation budget so that slightly
/// disturbed intermediate configurations still assemble.
#[derive(Clone, Copy, Debug)]
pub struct AssembleOptions {
    /// Vertex penetration (or interior overlap) deeper than this errors.
    pub penetration_allowance: f64,
    /// Apply convex-corner handling. Disabled only for diagnostics; plain
    /// edge rows at convex corner encounters over-tighten the polyhedron.
    pub corner_rows: bool,
}

impl Default for AssembleOptions {
    fn default() -> AssembleOptions {
        AssembleOptions {
            penetration_allowance: PENETRATION_TOL,
            corner_rows: true,
        }
    }
}

/// Dense gradient of one row, grouped by participating body.
/// Triples are laid out [d/dx, d/dy, d/dtheta].
#[derive(Clone, Copy, Debug)]
pub struct RowGradient {
    pub value: f64,
    pub edge_body: [f64; 3],
    pub vertex_body: [f64; 3],
}

/// Averaged outward normal at a polygon corner, in body-local coordinates.
/// None when the adjacent edge normals cancel.
pub fn averaged_normal(polygon: &crate::geometry::Polygon, corner: usize) -> Option<Vec2> {
    let n_in = polygon.edge(polygon.edge_into(corner)).normal;
    let n_out = polygon.edge(polygon.edge_out(corner)).normal;
    (n_in + n_out).normalized(DEGENERATE_NORMAL_TOL)
}

fn resolve_plane(scene: &Scene, pair: &ConstraintPair) -> Result<HalfPlane, ConstraintError> {
    let host = &scene.bodies[pair.edge_body].polygon;
    match pair.contact {
        ContactKind::Edge { edge } => {
            let e = host.edge(edge);
            Ok(HalfPlane {
                anchor: host.vertex(e.e0),
                normal: e.normal,
            })
        }
        ContactKind::Corner { corner } => {
            let normal =
                averaged_normal(host, corner).ok_or(ConstraintError::DegenerateCorner {
                    body: pair.edge_body,
                    vertex: corner,
                })?;
            Ok(HalfPlane {
                anchor: host.vertex(corner),
                normal,
            })
        }
    }
}

/// Current signed distance of one pair.
pub fn pair_distance(scene: &Scene, pair: &ConstraintPair) -> Result<f64, ConstraintError> {
    Ok(gradient_row(scene, pair)?.value)
}

/// Value and exact gradient of one pair's distance function at the current
/// configuration.
pub fn gradient_row(scene: &Scene, pair: &ConstraintPair) -> Result<RowGradient, ConstraintError> {
    let plane = resolve_plane(scene, pair)?;
    let point = scene.bodies[pair.vertex_body].polygon.vertex(pair.vertex);
    let eval = eval_half_plane(
        &scene.bodies[pair.edge_body].pose,
        &plane,
        &scene.bodies[pair.vertex_body].pose,
        point,
    );
    Ok(RowGradient {
        value: eval.value,
        edge_body: eval.host,
        vertex_body: eval.point,
    })
}

/// Row for an averaged-normal corner contact. Identical to `gradient_row`
/// but restricted to corner pairs, for callers that want the intent checked.
pub fn averaged_normal_row(
    scene: &Scene,
    pair: &ConstraintPair,
) -> Result<RowGradient, ConstraintError> {
    debug_assert!(
        matches!(pair.contact, ContactKind::Corner { .. }),
        "averaged_normal_row expects a corner pair"
    );
    gradient_row(scene, pair)
}

/// Turn a raw near-contact candidate into zero or more oriented constraint
/// pairs according to the corner kinds involved.
///
/// - No corner context: one plain edge row.
/// - Host corner convex, other vertex convex (or flat): one averaged-normal
///   row anchored at the host corner. Two plain rows would jam the sliding
///   motion such corner encounters allow.
/// - Host corner convex, other vertex concave: the contact really belongs
///   to the concave corner, whose two adjacent edges each constrain the
///   host corner as a point.
/// - Host corner concave or flat: the plain edge row stands as selected.
pub fn orient_pair(
    scene: &Scene,
    candidate: &crate::geometry::select::Candidate,
) -> Vec<ConstraintPair> {
    let plain = ConstraintPair {
        edge_body: candidate.edge_body,
        vertex_body: candidate.vertex_body,
        vertex: candidate.vertex,
        contact: ContactKind::Edge {
            edge: candidate.edge,
        },
    };
    let Some(corner) = candidate.corner else {
        return vec![plain];
    };
    let host_kind = scene.bodies[candidate.edge_body]
        .polygon
        .classify_corner(corner);
    let vertex_kind = scene.bodies[candidate.vertex_body]
        .polygon
        .classify_corner(candidate.vertex);
    match (host_kind, vertex_kind) {
        (CornerKind::Convex, CornerKind::Convex) | (CornerKind::Convex, CornerKind::Flat) => {
            vec![ConstraintPair {
                edge_body: candidate.edge_body,
                vertex_body: candidate.vertex_body,
                vertex: candidate.vertex,
                contact: ContactKind::Corner { corner },
            }]
        }
        (CornerKind::Convex, CornerKind::Concave) => {
            let vp = &scene.bodies[candidate.vertex_body].polygon;
            [
                vp.edge_into(candidate.vertex),
                vp.edge_out(candidate.vertex),
            ]
            .into_iter()
            .map(|edge| ConstraintPair {
                edge_body: candidate.vertex_body,
                vertex_body: candidate.edge_body,
                vertex: corner,
                contact: ContactKind::Edge { edge },
            })
            .collect()
        }
        _ => vec![plain],
    }
}

/// Assemble the full linearized system at the current configuration with
/// strict defaults.
pub fn assemble(scene: &Scene) -> Result<DistanceSystem, FlexError> {
    assemble_with(scene, AssembleOptions::default())
}

pub fn assemble_with(scene: &Scene, options: AssembleOptions) -> Result<DistanceSystem, FlexError> {
    let pairs = select_pairs_with(scene, &options)?;
    let free = FreeMap::new(scene);
    let mut jacobian = SparseMatrix::new(free.ncols());
    let mut d0 = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let g = gradient_row(scene, pair)?;
        let mut entries = Vec::with_capacity(6);
        if let Some(b) = free.block(pair.edge_body) {
            for (k, v) in g.edge_body.iter().enumerate() {
                entries.push((3 * b + k, *v));
            }
        }
        if let Some(b) = free.block(pair.vertex_body) {
            for (k, v) in g.vertex_body.iter().enumerate() {
                entries.push((3 * b + k, *v));
            }
        }
        jacobian.push_row(entries);
        let value = g.value;
        d0.push(if (-PENETRATION_TOL..0.0).contains(&value) {
            0.0
        } else {
            value
        });
    }
    Ok(DistanceSystem {
        pairs,
        d0,
        jacobian,
        free,
        epsilon: scene.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Body, Polygon, Pose};

    fn two_square_scene(gap: f64) -> Scene {
        Scene::new(
            vec![
                Body::new("left", Polygon::unit_square(), Pose::IDENTITY, false),
                Body::new(
                    "right",
                    Polygon::unit_square(),
                    Pose::new(1.0 + gap, 0.0, 0.0),
                    false,
                ),
            ],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn averaged_normal_of_square_corner_is_diagonal() {
        let p = Polygon::unit_square();
        // Corner 1 = (1, 0), between the bottom (+y = -1) and right (+x)
        // edges; the average points down-right.
        let n = averaged_normal(&p, 1).unwrap();
        let expect = Vec2::new(1.0, -1.0).normalized(0.0).unwrap();
        assert!((n - expect).norm() < 1e-12);
    }

    #[test]
    fn worked_example_two_squares_make_four_averaged_rows() {
        let scene = two_square_scene(0.05);
        let system = assemble(&scene).unwrap();
        assert_eq!(system.nrows(), 4);
        assert!(system
            .pairs
            .iter()
            .all(|p| matches!(p.contact, ContactKind::Corner { .. })));
        // Facing gap is 0.05 along x; the diagonal normals see it
        // foreshortened by cos(45 deg).
        for d in &system.d0 {
            assert!((d - 0.05 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        // Two bodies, both free: 6 columns, 6 structural entries per row.
        assert_eq!(system.ncols(), 6);
        for r in 0..system.nrows() {
            assert_eq!(system.jacobian.row_nnz(r), 6);
        }
    }

    #[test]
    fn fixed_body_drops_its_columns() {
        let mut scene = two_square_scene(0.05);
        scene.bodies[0].fixed = true;
        let system = assemble(&scene).unwrap();
        assert_eq!(system.ncols(), 3);
        for r in 0..system.nrows() {
            assert_eq!(system.jacobian.row_nnz(r), 3);
        }
    }

    #[test]
    fn deep_penetration_is_an_error() {
        // Offset vertically as well so the buried corner sits strictly
        // inside the other square rather than on its boundary line.
        let scene = Scene::new(
            vec![
                Body::new("left", Polygon::unit_square(), Pose::IDENTITY, false),
                Body::new(
                    "right",
                    Polygon::unit_square(),
                    Pose::new(0.8, 0.3, 0.0),
                    false,
                ),
            ],
            0.1,
        )
        .unwrap();
        match assemble(&scene) {
            Err(FlexError::Scene(crate::error::SceneError::Penetration { depth, .. })) => {
                assert!(depth > 0.1);
            }
            other => panic!("expected penetration error, got {other:?}"),
        }
    }

    #[test]
    fn wider_allowance_keeps_disturbed_scene_assemblable() {
        let scene = two_square_scene(-5e-4);
        assert!(assemble(&scene).is_err());
        let system = assemble_with(
            &scene,
            AssembleOptions {
                penetration_allowance: 1e-3,
                corner_rows: true,
            },
        )
        .unwrap();
        // The violated rows keep their true negative distances so the LP
        // can push the bodies apart again.
        assert!(system.d0.iter().any(|d| *d < -1e-4));
    }

    #[test]
    fn touching_squares_assemble_with_zero_distances() {
        let scene = two_square_scene(0.0);
        let system = assemble(&scene).unwrap();
        assert!(system.nrows() > 0);
        for d in &system.d0 {
            assert!(*d >= 0.0 && *d < 1e-12);
        }
    }
}
