//! Higher-level questions asked of the flex machinery: generated
//! objectives, tolerance budgets, bracing suggestions, and flock motion.

pub mod crossbeam;
pub mod flock;
pub mod tolerance;

pub use crossbeam::{suggest_cross_beam, CrossBeamSuggestion};
pub use flock::{
    flock_constraints, flock_iterate, flock_violation, x_spread, FlockOutcome, FlockRobot,
    FlockRowKind, FlockSpec, FlockStepParams, FlockSystem, DEFAULT_HALF_ANGLE, DEFAULT_K_NEAREST,
    DEFAULT_LEADER_HALF_WIDTH, DEFAULT_ROTATION_CAP,
};
pub use tolerance::{
    tolerance_search, ToleranceProbe, ToleranceQuery, ToleranceReport, TrackedPoint,
};

use crate::constraints::FreeMap;
use crate::error::AnalysisError;
use crate::geometry::Scene;
use crate::lp::{Objective, Provenance};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Recipes for objective vectors over the free displacement columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveSpec {
    /// Push the listed bodies (all free bodies when empty) along a common
    /// direction. Rotation columns get zero weight.
    Direction { direction: Vec2, bodies: Vec<usize> },
    /// Push every free body away from a center point (its own outward
    /// direction). None centers on the mean of free-body centroids.
    Radial { center: Option<Vec2> },
    /// Pull every free body's x toward the leader's current x; used by the
    /// flock pipeline, which regenerates it each iteration.
    LeaderX { leader: usize },
}

pub fn make_objective(scene: &Scene, spec: &ObjectiveSpec) -> Result<Objective, AnalysisError> {
    let free = FreeMap::new(scene);
    let mut weights = vec![0.0; free.ncols()];
    match spec {
        ObjectiveSpec::Direction { direction, bodies } => {
            let dir = direction
                .normalized(1e-12)
                .ok_or(AnalysisError::EmptyObjective)?;
            let targets: Vec<usize> = if bodies.is_empty() {
                free.free_bodies().to_vec()
            } else {
                for &b in bodies {
                    if b >= scene.bodies.len() {
                        return Err(AnalysisError::BodyOutOfRange(b));
                    }
                }
                bodies.clone()
            };
            for &body in &targets {
                if let Some(b) = free.block(body) {
                    weights[3 * b] = dir.x;
                    weights[3 * b + 1] = dir.y;
                }
            }
            finish(weights, Provenance::Direction)
        }
        ObjectiveSpec::Radial { center } => {
            let center = center.unwrap_or_else(|| mean_free_centroid(scene, &free));
            for (block, &body) in free.free_bodies().iter().enumerate() {
                let c = scene.bodies[body].world_centroid();
                if let Some(dir) = (c - center).normalized(1e-9) {
                    weights[3 * block] = dir.x;
                    weights[3 * block + 1] = dir.y;
                }
            }
            finish(weights, Provenance::Radial)
        }
        ObjectiveSpec::LeaderX { leader } => {
            if *leader >= scene.bodies.len() {
                return Err(AnalysisError::BodyOutOfRange(*leader));
            }
            let leader_x = scene.bodies[*leader].world_centroid().x;
            for (block, &body) in free.free_bodies().iter().enumerate() {
                if body == *leader {
                    continue;
                }
                let dx = scene.bodies[body].world_centroid().x - leader_x;
                if dx.abs() > 1e-12 {
                    weights[3 * block] = -dx.signum();
                }
            }
            finish(weights, Provenance::LeaderX)
        }
    }
}

fn finish(weights: Vec<f64>, provenance: Provenance) -> Result<Objective, AnalysisError> {
    if weights.iter().all(|w| *w == 0.0) {
        return Err(AnalysisError::EmptyObjective);
    }
    Ok(Objective {
        weights,
        provenance,
    })
}

fn mean_free_centroid(scene: &Scene, free: &FreeMap) -> Vec2 {
    let mut acc = Vec2::ZERO;
    for &body in free.free_bodies() {
        acc += scene.bodies[body].world_centroid();
    }
    acc * (1.0 / free.free_count().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Body, Polygon, Pose};

    fn three_bodies() -> Scene {
        Scene::new(
            vec![
                Body::new("a", Polygon::unit_square(), Pose::IDENTITY, false),
                Body::new(
                    "wall",
                    Polygon::unit_square(),
                    Pose::new(3.0, 0.0, 0.0),
                    true,
                ),
                Body::new("b", Polygon::unit_square(), Pose::new(6.0, 0.0, 0.0), false),
            ],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn direction_objective_covers_free_bodies_only() {
        let scene = three_bodies();
        let obj = make_objective(
            &scene,
            &ObjectiveSpec::Direction {
                direction: Vec2::new(2.0, 0.0),
                bodies: vec![],
            },
        )
        .unwrap();
        // Two free bodies, six columns; unit-normalized direction.
        assert_eq!(obj.weights, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(obj.provenance, Provenance::Direction);
    }

    #[test]
    fn direction_objective_for_a_subset() {
        let scene = three_bodies();
        let obj = make_objective(
            &scene,
            &ObjectiveSpec::Direction {
                direction: Vec2::new(0.0, -1.0),
                bodies: vec![2],
            },
        )
        .unwrap();
        assert_eq!(obj.weights, vec![0.0, 0.0, 0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn radial_objective_points_outward() {
        let scene = three_bodies();
        let obj = make_objective(&scene, &ObjectiveSpec::Radial { center: None }).unwrap();
        // Free centroids at (0.5, 0.5) and (6.5, 0.5); mean (3.5, 0.5).
        assert!((obj.weights[0] + 1.0).abs() < 1e-12);
        assert!((obj.weights[3] - 1.0).abs() < 1e-12);
        assert_eq!(obj.provenance, Provenance::Radial);
    }

    #[test]
    fn leader_x_pulls_toward_leader() {
        let scene = Scene::new(
            vec![
                Body::new("w", Polygon::unit_square(), Pose::IDENTITY, false),
                Body::new(
                    "leader",
                    Polygon::unit_square(),
                    Pose::new(3.0, 0.0, 0.0),
                    false,
                ),
                Body::new("e", Polygon::unit_square(), Pose::new(6.0, 0.0, 0.0), false),
            ],
            0.1,
        )
        .unwrap();
        let obj = make_objective(&scene, &ObjectiveSpec::LeaderX { leader: 1 }).unwrap();
        assert_eq!(obj.weights[0], 1.0); // west robot pulled +x
        assert_eq!(obj.weights[3], 0.0); // leader itself unweighted
        assert_eq!(obj.weights[6], -1.0); // east robot pulled -x
        assert_eq!(obj.provenance, Provenance::LeaderX);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let scene = three_bodies();
        assert!(matches!(
            make_objective(
                &scene,
                &ObjectiveSpec::Direction {
                    direction: Vec2::ZERO,
                    bodies: vec![],
                }
            ),
            Err(AnalysisError::EmptyObjective)
        ));
    }
}
