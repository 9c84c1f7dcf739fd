//! Cross-beam placement suggestion.
//!
//! A loose structure that sags under load can be stiffened by pinning a
//! rigid beam between two bodies. The most effective place for such a beam
//! is the vertex pair whose separation changes the most between the rest
//! configuration and the flexed one: a beam there removes the dominant
//! mode of motion. Candidate pairs are restricted to vertices that can see
//! each other in the rest configuration, because a straight beam cannot
//! pass through a third body.

use serde::Serialize;

use crate::error::AnalysisError;
use crate::geometry::{mutually_visible_pairs, Scene, VertexRef};

/// Best beam endpoints found by [`suggest_cross_beam`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossBeamSuggestion {
    /// First endpoint, on the lower-indexed body.
    pub a: VertexRef,
    /// Second endpoint.
    pub b: VertexRef,
    /// Distance between the endpoints in the rest configuration.
    pub initial: f64,
    /// Distance between the endpoints in the flexed configuration.
    pub flexed: f64,
    /// `|flexed - initial|`, the quantity being maximized.
    pub stretch: f64,
}

/// Pick the mutually visible vertex pair whose distance changes most
/// between `initial` and `flexed`.
///
/// The two scenes must describe the same assembly: same bodies in the same
/// order with the same polygons, differing only in poses. Visibility is
/// evaluated in `initial`, where the beam would be installed. Ties keep
/// the first pair in the deterministic enumeration order of
/// [`mutually_visible_pairs`].
pub fn suggest_cross_beam(
    initial: &Scene,
    flexed: &Scene,
) -> Result<CrossBeamSuggestion, AnalysisError> {
    check_same_assembly(initial, flexed)?;
    let pairs = mutually_visible_pairs(initial);
    if pairs.is_empty() {
        return Err(AnalysisError::NoVisiblePairs);
    }
    let mut best: Option<CrossBeamSuggestion> = None;
    for (a, b) in pairs {
        let d0 = initial.bodies[a.body]
            .world_vertex(a.vertex)
            .distance(initial.bodies[b.body].world_vertex(b.vertex));
        let d1 = flexed.bodies[a.body]
            .world_vertex(a.vertex)
            .distance(flexed.bodies[b.body].world_vertex(b.vertex));
        let stretch = (d1 - d0).abs();
        if best.as_ref().is_none_or(|cur| stretch > cur.stretch) {
            best = Some(CrossBeamSuggestion {
                a,
                b,
                initial: d0,
                flexed: d1,
                stretch,
            });
        }
    }
    Ok(best.expect("non-empty pair list yields a best pair"))
}

fn check_same_assembly(initial: &Scene, flexed: &Scene) -> Result<(), AnalysisError> {
    if initial.bodies.len() != flexed.bodies.len() {
        return Err(AnalysisError::SceneMismatch(format!(
            "{} bodies vs {}",
            initial.bodies.len(),
            flexed.bodies.len()
        )));
    }
    for (a, b) in initial.bodies.iter().zip(&flexed.bodies) {
        if a.name != b.name
            || a.fixed != b.fixed
            || a.polygon.vertex_count() != b.polygon.vertex_count()
        {
            return Err(AnalysisError::SceneMismatch(format!(
                "body {:?} differs between the scenes",
                a.name
            )));
        }
    }
    Ok(())
}
