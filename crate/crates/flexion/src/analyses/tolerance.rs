//! How much manufacturing tolerance can an assembly absorb before it flexes
//! past a displacement threshold?
//!
//! Material removed uniformly from every part is modeled by insetting the
//! free polygons by t. The flex metric (displacement of a tracked point
//! after the stepper converges) grows with t, so the largest admissible t
//! is found by bisection on the metric against the threshold.

use crate::analyses::{make_objective, ObjectiveSpec};
use crate::error::{AnalysisError, FlexError};
use crate::geometry::{inset_polygon, Scene};
use crate::stepper::{flex_iterate, StepParams};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// A material point of one body, in body-local coordinates, whose world
/// motion is the flex metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint {
    pub body: usize,
    pub local: Vec2,
}

#[derive(Clone, Debug)]
pub struct ToleranceQuery {
    /// Largest tolerance considered.
    pub t_max: f64,
    /// Metric threshold the flexed displacement must stay below.
    pub threshold: f64,
    pub objective: ObjectiveSpec,
    pub track: TrackedPoint,
    /// Bisection terminates when the bracket is this tight.
    pub bisect_tol: f64,
    pub params: StepParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProbe {
    pub inset: f64,
    pub displacement: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToleranceReport {
    /// Largest probed tolerance whose metric stayed at or below the
    /// threshold; None when even t = 0 exceeds it.
    pub t_star: Option<f64>,
    /// Every (inset, metric) evaluation, in probe order.
    pub probes: Vec<ToleranceProbe>,
    /// Whether the recorded probes are non-decreasing in t. Bisection
    /// assumes this; a false value flags the answer as approximate.
    pub monotone: bool,
}

pub fn tolerance_search(
    scene: &Scene,
    query: &ToleranceQuery,
) -> Result<ToleranceReport, FlexError> {
    if !(query.t_max.is_finite() && query.t_max > 0.0) {
        return Err(AnalysisError::BadToleranceRange(query.t_max).into());
    }
    if !(query.threshold.is_finite() && query.threshold > 0.0) {
        return Err(AnalysisError::BadThreshold(query.threshold).into());
    }
    if query.track.body >= scene.bodies.len() {
        return Err(AnalysisError::BodyOutOfRange(query.track.body).into());
    }
    query.params.validate().map_err(FlexError::from)?;

    let mut probes = Vec::new();
    let mut metric = |t: f64| -> Result<f64, FlexError> {
        let m = flex_metric(scene, query, t)?;
        probes.push(ToleranceProbe {
            inset: t,
            displacement: m,
        });
        Ok(m)
    };

    // Establish the bracket.
    let at_zero = metric(0.0)?;
    if at_zero > query.threshold {
        let monotone = is_monotone(&probes);
        return Ok(ToleranceReport {
            t_star: None,
            probes,
            monotone,
        });
    }
    let at_max = metric(query.t_max)?;
    if at_max <= query.threshold {
        let monotone = is_monotone(&probes);
        return Ok(ToleranceReport {
            t_star: Some(query.t_max),
            probes,
            monotone,
        });
    }

    // Invariant: metric(lo) <= threshold < metric(hi).
    let mut lo = 0.0;
    let mut hi = query.t_max;
    while hi - lo > query.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if metric(mid)? <= query.threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let monotone = is_monotone(&probes);
    Ok(ToleranceReport {
        t_star: Some(lo),
        probes,
        monotone,
    })
}

/// Flex once at inset `t` and measure the tracked point's motion.
///
/// For a directional probe the metric is the displacement component along
/// the probe direction: degrees of freedom the objective is indifferent to
/// land at arbitrary vertex values of the LP polytope, so the full
/// displacement magnitude would carry solver-dependent noise. Radial and
/// leader probes have no single axis and use the magnitude.
fn flex_metric(scene: &Scene, query: &ToleranceQuery, t: f64) -> Result<f64, FlexError> {
    let loosened = inset_scene(scene, t)?;
    let objective = make_objective(&loosened, &query.objective)?;
    let out = flex_iterate(&loosened, &objective, &query.params)?;
    let before = scene.bodies[query.track.body]
        .pose
        .transform_point(query.track.local);
    let after = out.scene.bodies[query.track.body]
        .pose
        .transform_point(query.track.local);
    let delta = after - before;
    Ok(match &query.objective {
        ObjectiveSpec::Direction { direction, .. } => {
            let dir = direction
                .normalized(1e-12)
                .ok_or(AnalysisError::EmptyObjective)?;
            delta.dot(dir)
        }
        _ => delta.norm(),
    })
}

/// Inset every free body's polygon; the fixed surroundings keep their
/// nominal outline.
fn inset_scene(scene: &Scene, t: f64) -> Result<Scene, FlexError> {
    let mut out = scene.clone();
    for body in out.bodies.iter_mut() {
        if !body.fixed {
            body.polygon = inset_polygon(&body.polygon, t)?;
        }
    }
    Ok(out)
}

fn is_monotone(probes: &[ToleranceProbe]) -> bool {
    let mut sorted = probes.to_vec();
    sorted.sort_by(|a, b| a.inset.partial_cmp(&b.inset).unwrap());
    sorted
        .windows(2)
        .all(|w| w[1].displacement >= w[0].displacement - 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures;

    #[test]
    fn cavity_tolerance_is_threshold_minus_clearance() {
        // Clearance 0.03 gives metric(t) = 0.03 + t, so a threshold of
        // 0.07 admits tolerances up to 0.04.
        let scene = structures::boxed_square(0.03);
        let query = ToleranceQuery {
            t_max: 0.08,
            threshold: 0.07,
            objective: ObjectiveSpec::Direction {
                direction: Vec2::new(1.0, 0.0),
                bodies: vec![],
            },
            track: TrackedPoint {
                body: 0,
                local: Vec2::ZERO,
            },
            bisect_tol: 1e-3,
            params: StepParams::default(),
        };
        let report = tolerance_search(&scene, &query).unwrap();
        let t_star = report.t_star.expect("t=0 must satisfy the threshold");
        assert!((t_star - 0.04).abs() <= 1.5e-3, "t_star {t_star}");
        assert!(report.monotone);
        assert!(report.probes.len() >= 3);
    }

    #[test]
    fn hopeless_threshold_returns_none() {
        let scene = structures::boxed_square(0.05);
        let query = ToleranceQuery {
            t_max: 0.05,
            threshold: 0.01,
            objective: ObjectiveSpec::Direction {
                direction: Vec2::new(1.0, 0.0),
                bodies: vec![],
            },
            track: TrackedPoint {
                body: 0,
                local: Vec2::ZERO,
            },
            bisect_tol: 1e-3,
            params: StepParams::default(),
        };
        let report = tolerance_search(&scene, &query).unwrap();
        assert!(report.t_star.is_none());
        assert_eq!(report.probes.len(), 1);
    }
}
