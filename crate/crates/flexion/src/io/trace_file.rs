//! JSON trace files: a self-contained record of one stepping run.
//!
//! A trace embeds the initial scene, the objective that drove the run, the
//! stepping parameters, and the per-iteration records, so a run can be
//! inspected or replayed without the original inputs. Parameters are kept
//! as raw JSON because flex and flock runs use different parameter sets.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::geometry::Pose;
use crate::io::scene_file::{self, ParsedScene, SceneDoc};
use crate::lp::{Objective, Provenance};
use crate::stepper::{PhaseTimings, StepTrace, StopReason};

pub const TRACE_VERSION: u32 = 1;

/// The objective as recorded in a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub provenance: Provenance,
    pub weights: Vec<f64>,
}

/// Wire form of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub version: u32,
    /// The scene the run started from, as a scene document.
    pub scene: SceneDoc,
    pub objective: ObjectiveDoc,
    /// Echo of the stepping parameters used.
    pub params: serde_json::Value,
    pub iterations: Vec<crate::stepper::IterationRecord>,
    pub reason: StopReason,
    pub timings: PhaseTimings,
}

impl TraceFile {
    /// Build a trace record from a finished run. `initial` must be the
    /// scene the run started from.
    pub fn capture<P: Serialize>(
        initial: &ParsedScene,
        objective: &Objective,
        params: &P,
        trace: &StepTrace,
    ) -> TraceFile {
        TraceFile {
            version: TRACE_VERSION,
            scene: scene_file::to_doc(&initial.scene, initial.bounds, initial.flock.as_ref()),
            objective: ObjectiveDoc {
                provenance: objective.provenance,
                weights: objective.weights.clone(),
            },
            params: serde_json::to_value(params).expect("step parameters serialize"),
            iterations: trace.iterations.clone(),
            reason: trace.reason,
            timings: trace.timings,
        }
    }

    /// Re-validate the embedded scene document.
    pub fn initial_scene(&self) -> Result<ParsedScene, IoError> {
        scene_file::realize(self.scene.clone())
    }

    /// Poses after the last iteration.
    pub fn final_poses(&self) -> Option<&[Pose]> {
        self.iterations.last().map(|r| r.poses.as_slice())
    }
}

pub fn trace_to_json(trace: &TraceFile) -> String {
    serde_json::to_string_pretty(trace).expect("trace documents serialize") + "\n"
}

/// Parse a trace file, checking the version and that it records at least
/// one iteration.
pub fn parse_trace(text: &str) -> Result<TraceFile, IoError> {
    let trace: TraceFile = serde_json::from_str(text)?;
    if trace.version != TRACE_VERSION {
        return Err(IoError::UnsupportedTraceVersion(trace.version));
    }
    if trace.iterations.is_empty() {
        return Err(IoError::EmptyTrace);
    }
    Ok(trace)
}

pub fn write_trace(path: &Path, trace: &TraceFile) -> Result<(), IoError> {
    fs::write(path, trace_to_json(trace))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<TraceFile, IoError> {
    parse_trace(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyses::{make_objective, ObjectiveSpec};
    use crate::stepper::{flex_iterate, StepParams};
    use crate::structures;
    use crate::vec2::Vec2;

    fn run_cavity() -> (
        ParsedScene,
        Objective,
        StepParams,
        crate::stepper::FlexOutcome,
    ) {
        let scene = structures::boxed_square(0.05);
        let parsed = ParsedScene {
            scene: scene.clone(),
            bounds: None,
            flock: None,
            warnings: Vec::new(),
        };
        let objective = make_objective(
            &scene,
            &ObjectiveSpec::Direction {
                direction: Vec2::new(1.0, 0.0),
                bodies: vec![],
            },
        )
        .unwrap();
        let params = StepParams::default();
        let out = flex_iterate(&scene, &objective, &params).unwrap();
        (parsed, objective, params, out)
    }

    #[test]
    fn capture_and_replay_round_trip() {
        let (parsed, objective, params, out) = run_cavity();
        let trace = TraceFile::capture(&parsed, &objective, &params, &out.trace);
        let text = trace_to_json(&trace);
        let back = parse_trace(&text).unwrap();

        assert_eq!(back.reason, out.trace.reason);
        assert_eq!(back.iterations.len(), out.trace.iterations.len());
        assert_eq!(back.objective.provenance, Provenance::Direction);

        // Replaying the final poses on the embedded scene reproduces the
        // run's final configuration exactly.
        let initial = back.initial_scene().unwrap();
        let final_poses = back.final_poses().unwrap();
        let replayed = initial.scene.with_poses(final_poses);
        for (a, b) in replayed.bodies.iter().zip(&out.scene.bodies) {
            assert_eq!(a.pose, b.pose);
        }
    }

    #[test]
    fn version_and_emptiness_are_checked() {
        let (parsed, objective, params, out) = run_cavity();
        let mut trace = TraceFile::capture(&parsed, &objective, &params, &out.trace);

        trace.version = 9;
        let text = trace_to_json(&trace);
        assert!(matches!(
            parse_trace(&text),
            Err(IoError::UnsupportedTraceVersion(9))
        ));

        trace.version = TRACE_VERSION;
        trace.iterations.clear();
        let text = trace_to_json(&trace);
        assert!(matches!(parse_trace(&text), Err(IoError::EmptyTrace)));
    }
}
