//! Time stepping: follow a flex direction through large motions by
//! alternating linearization, LP solve, and a feasibility line search.
//!
//! The linearization is only trustworthy near the configuration it was
//! taken at, so each accepted step is scaled until the re-measured
//! violation stays within the per-step budget eta. Because every iteration
//! re-assembles from the actual poses, violation never accumulates: a step
//! that leaves residual penetration produces negative distances in the next
//! system, and the next solve pushes the bodies apart again.

use crate::constraints::{assemble_with, AssembleOptions, PENETRATION_TOL};
use crate::error::{FlexError, StepError};
use crate::geometry::overlap::scene_overlap;
use crate::geometry::{Pose, Scene};
use crate::lp::{solve_flex, Bounds, Displacement, LpOutcome, Objective};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Default per-step violation budget.
pub const DEFAULT_ETA: f64 = 1e-3;

/// Default geometric scale grid searched by the line search, ascending.
pub const DEFAULT_SCALE_GRID: [f64; 7] =
    [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0, 2.0, 4.0];

pub const DEFAULT_MAX_ITERS: usize = 50;

/// Relative factor applied to the scene diameter for the default
/// convergence threshold on realized objective gain.
pub const GAIN_TOL_FACTOR: f64 = 1e-6;

/// Times the trust region may be halved after failed line searches before
/// the run is declared stalled.
const MAX_HALVINGS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// Per-step violation budget: a candidate step is accepted only if the
    /// re-measured worst violation stays at or below this.
    pub eta: f64,
    /// Candidate step scales, ascending. Scales above 1 extrapolate past
    /// the LP step and are only taken while the scaled displacement still
    /// respects the per-DOF bounds.
    pub scale_grid: Vec<f64>,
    pub max_iters: usize,
    /// Absolute convergence threshold on the realized objective gain of a
    /// step. None derives it from the scene diameter.
    pub gain_tol: Option<f64>,
    /// Per-step displacement bounds. None derives them from epsilon.
    pub bounds: Option<Bounds>,
}

impl Default for StepParams {
    fn default() -> StepParams {
        StepParams {
            eta: DEFAULT_ETA,
            scale_grid: DEFAULT_SCALE_GRID.to_vec(),
            max_iters: DEFAULT_MAX_ITERS,
            gain_tol: None,
            bounds: None,
        }
    }
}

impl StepParams {
    pub fn validate(&self) -> Result<(), StepError> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(StepError::BadParams(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.scale_grid.is_empty() {
            return Err(StepError::BadParams("scale grid is empty".into()));
        }
        if self.scale_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(StepError::BadParams(
                "scale grid entries must be positive".into(),
            ));
        }
        if self.scale_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StepError::BadParams(
                "scale grid must be strictly ascending".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(StepError::BadParams("max_iters must be at least 1".into()));
        }
        if let Some(g) = self.gain_tol {
            if !(g.is_finite() && g > 0.0) {
                return Err(StepError::BadParams(format!(
                    "gain tolerance must be positive, got {g}"
                )));
            }
        }
        Ok(())
    }
}

/// One accepted (or rejected, scale 0) step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// LP optimum at the configuration the step started from.
    pub objective: f64,
    /// Scale the line search accepted; 0 when no scale was feasible and
    /// the trust region was halved instead.
    pub scale: f64,
    /// Worst violation measured after applying the step.
    pub violation: f64,
    /// Poses of all bodies after the step.
    pub poses: Vec<Pose>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Realized objective gain fell below the tolerance.
    Converged,
    MaxIters,
    /// The LP reported an unbounded improvement direction; only possible
    /// with caller-supplied infinite bounds.
    LpUnbounded,
    /// No scale was feasible even after shrinking the trust region.
    Stalled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub assemble: f64,
    pub solve: f64,
    pub search: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepTrace {
    pub iterations: Vec<IterationRecord>,
    pub reason: StopReason,
    pub timings: PhaseTimings,
}

#[derive(Clone, Debug)]
pub struct FlexOutcome {
    pub trace: StepTrace,
    pub scene: Scene,
}

/// Move every free body by `scale` times its displacement entry.
pub fn apply_displacement(scene: &Scene, dq: &Displacement, scale: f64) -> Scene {
    let mut out = scene.clone();
    let mut block = 0;
    for body in out.bodies.iter_mut() {
        if body.fixed {
            continue;
        }
        let v = dq.values();
        body.pose.x += scale * v[3 * block];
        body.pose.y += scale * v[3 * block + 1];
        body.pose.theta += scale * v[3 * block + 2];
        block += 1;
    }
    assert_eq!(3 * block, dq.len(), "displacement length mismatch");
    out
}

/// Worst constraint violation at a configuration: the deepest negative
/// contact distance over the re-selected pairs, combined with the deepest
/// polygon interpenetration. Zero for a clean scene.
pub fn max_violation(scene: &Scene) -> f64 {
    let mut worst: f64 = 0.0;
    // Infinite allowance: measure, never error.
    let options = AssembleOptions {
        penetration_allowance: f64::INFINITY,
        corner_rows: true,
    };
    if let Ok(system) = assemble_with(scene, options) {
        for d in &system.d0 {
            worst = worst.max(-d);
        }
    }
    if let Some((_, _, depth)) = scene_overlap(scene, 0.0) {
        worst = worst.max(depth);
    }
    // Exact touching contacts measure as depths at rounding scale; anything
    // inside the penetration tolerance is not a violation.
    if worst <= PENETRATION_TOL {
        0.0
    } else {
        worst
    }
}

/// Largest scale from the grid whose step keeps the violation within eta
/// and the scaled displacement within bounds. Zero when none qualifies.
pub fn line_search(scene: &Scene, dq: &Displacement, params: &StepParams) -> f64 {
    let bounds = params
        .bounds
        .unwrap_or_else(|| Bounds::from_epsilon(scene.epsilon));
    for &s in params.scale_grid.iter().rev() {
        if s > 1.0 && !within_bounds(dq, s, bounds) {
            continue;
        }
        let candidate = apply_displacement(scene, dq, s);
        if max_violation(&candidate) <= params.eta {
            return s;
        }
    }
    0.0
}

fn within_bounds(dq: &Displacement, scale: f64, bounds: Bounds) -> bool {
    let slack = 1e-12;
    dq.values().chunks_exact(3).all(|c| {
        (c[0] * scale).abs() <= bounds.translation + slack
            && (c[1] * scale).abs() <= bounds.translation + slack
            && (c[2] * scale).abs() <= bounds.rotation + slack
    })
}

/// Follow the objective through repeated linearize/solve/step rounds.
///
/// Returns the trace and the final scene. The per-iteration assembly runs
/// with the penetration allowance widened to eta, matching the violation
/// the line search may legally leave behind.
pub fn flex_iterate(
    scene: &Scene,
    objective: &Objective,
    params: &StepParams,
) -> Result<FlexOutcome, FlexError> {
    params.validate()?;
    let full_bounds = params
        .bounds
        .unwrap_or_else(|| Bounds::from_epsilon(scene.epsilon));
    let gain_tol = params
        .gain_tol
        .unwrap_or_else(|| GAIN_TOL_FACTOR * scene.diameter());

    let started = Instant::now();
    let mut timings = PhaseTimings::default();
    let mut iterations = Vec::new();
    let mut current = scene.clone();
    let mut bounds_now = full_bounds;
    let mut halvings = 0u32;
    let mut reason = StopReason::MaxIters;

    for _ in 0..params.max_iters {
        let t = Instant::now();
        let system = assemble_with(
            &current,
            AssembleOptions {
                penetration_allowance: params.eta,
                corner_rows: true,
            },
        )?;
        timings.assemble += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let outcome = solve_flex(&system, objective, Some(bounds_now))?;
        timings.solve += t.elapsed().as_secs_f64();

        let (dq, lp_objective) = match outcome {
            LpOutcome::Optimal {
                displacement,
                objective,
            } => (displacement, objective),
            LpOutcome::Infeasible => return Err(StepError::Infeasible.into()),
            LpOutcome::Unbounded => {
                reason = StopReason::LpUnbounded;
                break;
            }
        };

        if lp_objective <= gain_tol {
            reason = StopReason::Converged;
            break;
        }

        let t = Instant::now();
        let step_params = StepParams {
            bounds: Some(bounds_now),
            ..params.clone()
        };
        let scale = line_search(&current, &dq, &step_params);
        timings.search += t.elapsed().as_secs_f64();

        if scale == 0.0 {
            halvings += 1;
            iterations.push(IterationRecord {
                objective: lp_objective,
                scale: 0.0,
                violation: max_violation(&current),
                poses: current.poses(),
            });
            if halvings > MAX_HALVINGS {
                reason = StopReason::Stalled;
                break;
            }
            bounds_now = bounds_now.halved();
            continue;
        }

        current = apply_displacement(&current, &dq, scale);
        iterations.push(IterationRecord {
            objective: lp_objective,
            scale,
            violation: max_violation(&current),
            poses: current.poses(),
        });
        // A successful step earns back the full trust region.
        bounds_now = full_bounds;
        halvings = 0;

        if scale * lp_objective < gain_tol {
            reason = StopReason::Converged;
            break;
        }
    }

    timings.total = started.elapsed().as_secs_f64();
    Ok(FlexOutcome {
        trace: StepTrace {
            iterations,
            reason,
            timings,
        },
        scene: current,
    })
}
