//! Camera-constrained flock compression.
//!
//! A flock of mobile robots keeps formation by sight: every robot except a
//! designated leader watches a marker on its predecessor in a tree rooted
//! at the leader, through a forward-facing camera with a limited field of
//! view. The flock should contract toward the leader's column (shrink its
//! horizontal spread) without any robot losing sight of its marker or
//! driving into a flockmate.
//!
//! Both requirements are half-plane distances of exactly the kind the
//! contact pipeline linearizes. A view cone is the intersection of two
//! half-planes anchored at the camera apex, so "marker stays visible" is
//! two rows per observer whose host frame is the observer body and whose
//! tracked point is the predecessor's marker. Collision avoidance reuses
//! edge-vertex rows between each robot and its nearest flockmates. Adding
//! per-step rotation caps and a translation box for the leader gives one
//! LP per step; iterating it with the usual line search contracts the
//! flock while every constraint holds.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analyses::{make_objective, ObjectiveSpec};
use crate::constraints::{eval_half_plane, FreeMap, HalfPlane, SparseMatrix, PENETRATION_TOL};
use crate::error::{AnalysisError, FlexError, FlockError, StepError};
use crate::geometry::{check_clearance, scene_overlap, Scene};
use crate::lp::{solve_rows_min_norm, Bounds, LpOutcome, ROTATION_BOUND};
use crate::stepper::{
    apply_displacement, IterationRecord, PhaseTimings, StepTrace, StopReason, DEFAULT_ETA,
    GAIN_TOL_FACTOR,
};
use crate::vec2::Vec2;

/// Default camera cone half-angle, radians.
pub const DEFAULT_HALF_ANGLE: f64 = 0.6;
/// Default number of nearest flockmates paired for collision rows.
pub const DEFAULT_K_NEAREST: usize = 5;
/// Default per-step rotation budget, radians.
pub const DEFAULT_ROTATION_CAP: f64 = 0.1;
/// Default per-step, per-axis translation budget for the leader.
pub const DEFAULT_LEADER_HALF_WIDTH: f64 = 0.5;

/// One robot's camera and marker, all in the robot's local frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlockRobot {
    /// Robot this one watches; `None` exactly for the leader.
    #[serde(default)]
    pub predecessor: Option<usize>,
    /// Camera apex.
    #[serde(default = "vec2_zero")]
    pub camera_apex: Vec2,
    /// Camera boresight angle, radians.
    #[serde(default)]
    pub camera_axis: f64,
    /// Cone half-angle, radians, in (0, pi/2).
    #[serde(default = "default_half_angle")]
    pub half_angle: f64,
    /// Marker the robot's followers watch.
    #[serde(default = "vec2_zero")]
    pub marker: Vec2,
}

fn vec2_zero() -> Vec2 {
    Vec2::ZERO
}

fn default_half_angle() -> f64 {
    DEFAULT_HALF_ANGLE
}

fn default_k_nearest() -> usize {
    DEFAULT_K_NEAREST
}

fn default_rotation_cap() -> f64 {
    DEFAULT_ROTATION_CAP
}

fn default_leader_half_width() -> f64 {
    DEFAULT_LEADER_HALF_WIDTH
}

/// Flock-wide wiring: one [`FlockRobot`] per scene body plus shared caps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlockSpec {
    /// Per-body camera data, indexed like `scene.bodies`.
    pub robots: Vec<FlockRobot>,
    /// Index of the leader body.
    pub leader: usize,
    /// Each robot gets collision rows against this many nearest flockmates.
    #[serde(default = "default_k_nearest")]
    pub k_nearest: usize,
    /// Per-step rotation budget for every robot, radians.
    #[serde(default = "default_rotation_cap")]
    pub rotation_cap: f64,
    /// Per-step, per-axis translation budget for the leader.
    #[serde(default = "default_leader_half_width")]
    pub leader_half_width: f64,
}

impl FlockSpec {
    /// Check the spec against a scene: index ranges, the predecessor tree,
    /// and parameter domains.
    pub fn validate(&self, scene: &Scene) -> Result<(), FlockError> {
        let n = self.robots.len();
        if n != scene.bodies.len() {
            return Err(FlockError::LengthMismatch {
                got: n,
                want: scene.bodies.len(),
            });
        }
        if self.leader >= n {
            return Err(FlockError::BadLeader(self.leader));
        }
        if self.robots[self.leader].predecessor.is_some() {
            return Err(FlockError::LeaderHasPredecessor(self.leader));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, robot) in self.robots.iter().enumerate() {
            if i == self.leader {
                continue;
            }
            match robot.predecessor {
                None => return Err(FlockError::MissingPredecessor(i)),
                Some(p) if p >= n || p == i => return Err(FlockError::NotATree(i)),
                Some(p) => children[p].push(i),
            }
        }
        // Every robot has one predecessor edge except the leader, so the
        // graph is a tree exactly when all robots are reachable from the
        // leader along successor edges.
        let mut seen = vec![false; n];
        let mut stack = vec![self.leader];
        seen[self.leader] = true;
        while let Some(at) = stack.pop() {
            for &c in &children[at] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(FlockError::NotATree(orphan));
        }
        for (i, robot) in self.robots.iter().enumerate() {
            let bad_angle = !robot.half_angle.is_finite()
                || robot.half_angle <= 0.0
                || robot.half_angle >= std::f64::consts::FRAC_PI_2;
            if bad_angle
                || !robot.camera_axis.is_finite()
                || !robot.camera_apex.is_finite()
                || !robot.marker.is_finite()
            {
                return Err(FlockError::BadHalfAngle(i, robot.half_angle));
            }
        }
        if self.k_nearest == 0 {
            return Err(FlockError::BadK);
        }
        if !(self.rotation_cap > 0.0 && self.rotation_cap.is_finite()) {
            return Err(FlockError::BadRotationCap(self.rotation_cap));
        }
        if !(self.leader_half_width > 0.0 && self.leader_half_width.is_finite()) {
            return Err(FlockError::BadLeaderBox(self.leader_half_width));
        }
        Ok(())
    }
}

/// What a row of a [`FlockSystem`] constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlockRowKind {
    /// Predecessor marker stays inside `observer`'s left cone boundary.
    FovLeft { observer: usize },
    /// Predecessor marker stays inside `observer`'s right cone boundary.
    FovRight { observer: usize },
    /// `owner`'s vertex stays outside one edge half-plane of `host`.
    Collision {
        host: usize,
        edge: usize,
        owner: usize,
        vertex: usize,
    },
    /// Per-step rotation budget of `body`; `upper` is the +cap side.
    RotationCap { body: usize, upper: bool },
    /// Per-step translation budget of the leader along one axis.
    LeaderBox { horizontal: bool, upper: bool },
}

/// Linearized flock constraints at one configuration: rows over the free
/// pose columns, current distances, and a tag per row.
#[derive(Clone, Debug)]
pub struct FlockSystem {
    pub rows: SparseMatrix,
    pub d0: Vec<f64>,
    pub kinds: Vec<FlockRowKind>,
    pub free: FreeMap,
}

impl FlockSystem {
    pub fn nrows(&self) -> usize {
        self.d0.len()
    }
}

/// Local half-plane of one cone boundary; `left` picks the boundary at
/// `axis + half_angle`. Normals point into the cone, so the watched point
/// is visible exactly when both distances are non-negative.
fn cone_plane(robot: &FlockRobot, left: bool) -> HalfPlane {
    let angle = if left {
        robot.camera_axis + robot.half_angle
    } else {
        robot.camera_axis - robot.half_angle
    };
    let u = Vec2::new(angle.cos(), angle.sin());
    let normal = if left {
        Vec2::new(u.y, -u.x)
    } else {
        Vec2::new(-u.y, u.x)
    };
    HalfPlane {
        anchor: robot.camera_apex,
        normal,
    }
}

/// Indices of the `k` nearest other bodies by world centroid distance,
/// ties broken toward lower index.
fn k_nearest(scene: &Scene, body: usize, k: usize) -> Vec<usize> {
    let center = scene.bodies[body].world_centroid();
    let mut others: Vec<(f64, usize)> = scene
        .bodies
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != body)
        .map(|(j, b)| (center.distance(b.world_centroid()), j))
        .collect();
    others.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("centroid distances are finite")
            .then(a.1.cmp(&b.1))
    });
    others.truncate(k);
    others.into_iter().map(|(_, j)| j).collect()
}

fn scatter(
    free: &FreeMap,
    host_body: usize,
    host: [f64; 3],
    point_body: usize,
    point: [f64; 3],
) -> Vec<(usize, f64)> {
    let mut entries = Vec::with_capacity(6);
    if let Some(b) = free.block(host_body) {
        for (k, v) in host.iter().enumerate() {
            entries.push((3 * b + k, *v));
        }
    }
    if let Some(b) = free.block(point_body) {
        for (k, v) in point.iter().enumerate() {
            entries.push((3 * b + k, *v));
        }
    }
    entries
}

fn clamp_noise(d: f64) -> f64 {
    if (-PENETRATION_TOL..0.0).contains(&d) {
        0.0
    } else {
        d
    }
}

/// Assemble the flock constraint system at the scene's current poses.
///
/// `allowance` is the violation budget: a cone distance below `-allowance`
/// is an error (the marker is genuinely out of view), while distances in
/// `[-allowance, 0)` are kept as true negatives so the next LP step pulls
/// the marker back in. Collision rows follow the same rule per edge
/// half-plane; a vertex far behind a non-facing edge is not a contact and
/// its row is dropped rather than treated as violated.
pub fn flock_constraints(
    scene: &Scene,
    spec: &FlockSpec,
    allowance: f64,
) -> Result<FlockSystem, FlexError> {
    spec.validate(scene)?;
    let free = FreeMap::new(scene);
    let mut rows = SparseMatrix::new(free.ncols());
    let mut d0 = Vec::new();
    let mut kinds = Vec::new();

    for (i, robot) in spec.robots.iter().enumerate() {
        let Some(p) = robot.predecessor else {
            continue;
        };
        let marker = spec.robots[p].marker;
        for left in [true, false] {
            let plane = cone_plane(robot, left);
            let eval =
                eval_half_plane(&scene.bodies[i].pose, &plane, &scene.bodies[p].pose, marker);
            let value = clamp_noise(eval.value);
            if value < -allowance {
                return Err(FlockError::MarkerOutsideCone {
                    observer: i,
                    violation: -value,
                }
                .into());
            }
            rows.push_row(scatter(&free, i, eval.host, p, eval.point));
            d0.push(value);
            kinds.push(if left {
                FlockRowKind::FovLeft { observer: i }
            } else {
                FlockRowKind::FovRight { observer: i }
            });
        }
    }

    for i in 0..scene.bodies.len() {
        for j in k_nearest(scene, i, spec.k_nearest) {
            if scene.bodies[i].fixed && scene.bodies[j].fixed {
                continue;
            }
            let host = &scene.bodies[j];
            for e in 0..host.polygon.edge_count() {
                let edge = host.polygon.edge(e);
                let plane = HalfPlane {
                    anchor: host.polygon.vertex(edge.e0),
                    normal: edge.normal,
                };
                for v in 0..scene.bodies[i].polygon.vertex_count() {
                    let eval = eval_half_plane(
                        &host.pose,
                        &plane,
                        &scene.bodies[i].pose,
                        scene.bodies[i].polygon.vertex(v),
                    );
                    let value = clamp_noise(eval.value);
                    if value < -allowance {
                        continue;
                    }
                    rows.push_row(scatter(&free, j, eval.host, i, eval.point));
                    d0.push(value);
                    kinds.push(FlockRowKind::Collision {
                        host: j,
                        edge: e,
                        owner: i,
                        vertex: v,
                    });
                }
            }
        }
    }

    for i in 0..scene.bodies.len() {
        let Some(block) = free.block(i) else {
            continue;
        };
        let theta_col = 3 * block + 2;
        for upper in [false, true] {
            let sign = if upper { -1.0 } else { 1.0 };
            rows.push_row(vec![(theta_col, sign)]);
            d0.push(spec.rotation_cap);
            kinds.push(FlockRowKind::RotationCap { body: i, upper });
        }
    }

    if let Some(block) = free.block(spec.leader) {
        for (offset, horizontal) in [(0, true), (1, false)] {
            for upper in [false, true] {
                let sign = if upper { -1.0 } else { 1.0 };
                rows.push_row(vec![(3 * block + offset, sign)]);
                d0.push(spec.leader_half_width);
                kinds.push(FlockRowKind::LeaderBox { horizontal, upper });
            }
        }
    }

    Ok(FlockSystem {
        rows,
        d0,
        kinds,
        free,
    })
}

/// Worst standing violation in a flock configuration: the deepest cone
/// miss or body overlap, zero when every constraint holds.
pub fn flock_violation(scene: &Scene, spec: &FlockSpec) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, robot) in spec.robots.iter().enumerate() {
        let Some(p) = robot.predecessor else {
            continue;
        };
        let marker = spec.robots[p].marker;
        for left in [true, false] {
            let plane = cone_plane(robot, left);
            let eval =
                eval_half_plane(&scene.bodies[i].pose, &plane, &scene.bodies[p].pose, marker);
            worst = worst.max(-eval.value);
        }
    }
    if let Some((_, _, depth)) = scene_overlap(scene, 0.0) {
        worst = worst.max(depth);
    }
    worst
}

/// Horizontal spread of the flock: max minus min body centroid x.
pub fn x_spread(scene: &Scene) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for body in &scene.bodies {
        let x = body.world_centroid().x;
        min = min.min(x);
        max = max.max(x);
    }
    max - min
}

/// Stepping knobs for [`flock_iterate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlockStepParams {
    /// Violation budget during stepping; a step is accepted when the worst
    /// cone or overlap violation stays within this.
    pub eta: f64,
    /// Candidate step fractions, ascending, all in (0, 1]. Fractions above
    /// 1 are disallowed because rotation caps and the leader box are
    /// per-step limits that an overshoot would break.
    pub scale_grid: Vec<f64>,
    pub max_iters: usize,
    /// Convergence threshold on the LP gain; `None` picks
    /// 1e-6 x scene diameter.
    pub min_gain: Option<f64>,
    /// Per-step, per-axis translation budget for every robot.
    pub translation_bound: f64,
}

impl Default for FlockStepParams {
    fn default() -> Self {
        FlockStepParams {
            eta: DEFAULT_ETA,
            scale_grid: vec![1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0],
            max_iters: 30,
            min_gain: None,
            translation_bound: 1.0,
        }
    }
}

impl FlockStepParams {
    pub fn validate(&self) -> Result<(), StepError> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(StepError::BadParams(
                "eta must be positive and finite".into(),
            ));
        }
        if self.scale_grid.is_empty() {
            return Err(StepError::BadParams("scale grid must not be empty".into()));
        }
        let ascending = self.scale_grid.windows(2).all(|w| w[0] < w[1]);
        let in_range = self
            .scale_grid
            .iter()
            .all(|s| s.is_finite() && *s > 0.0 && *s <= 1.0);
        if !ascending || !in_range {
            return Err(StepError::BadParams(
                "scale grid must be strictly ascending with entries in (0, 1]".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(StepError::BadParams("max_iters must be at least 1".into()));
        }
        if let Some(g) = self.min_gain {
            if !(g > 0.0 && g.is_finite()) {
                return Err(StepError::BadParams("min_gain must be positive".into()));
            }
        }
        if !(self.translation_bound > 0.0 && self.translation_bound.is_finite()) {
            return Err(StepError::BadParams(
                "translation_bound must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Final state of a flock run.
#[derive(Clone, Debug)]
pub struct FlockOutcome {
    pub trace: StepTrace,
    pub scene: Scene,
}

/// Contract the flock toward the leader's column.
///
/// Each iteration reassembles [`flock_constraints`] and the leader-seeking
/// objective at the current poses, solves one LP, and line-searches the
/// proposed displacement so the true (nonlinear) violation stays within
/// `params.eta`. Stops when the LP gain drops below the threshold, every
/// robot reaches the leader's column, the iteration budget runs out, or no
/// step fraction is acceptable.
pub fn flock_iterate(
    scene: &Scene,
    spec: &FlockSpec,
    params: &FlockStepParams,
) -> Result<FlockOutcome, FlexError> {
    params.validate()?;
    spec.validate(scene)?;
    check_clearance(scene, params.eta)?;

    let started = Instant::now();
    let mut timings = PhaseTimings::default();
    let min_gain = params
        .min_gain
        .unwrap_or(GAIN_TOL_FACTOR * scene.diameter());
    let mut current = scene.clone();
    let mut iterations = Vec::new();
    let mut reason = StopReason::MaxIters;

    for _ in 0..params.max_iters {
        let t = Instant::now();
        let system = flock_constraints(&current, spec, params.eta)?;
        timings.assemble += t.elapsed().as_secs_f64();

        // All robots already on the leader's column leaves nothing to pull.
        let objective = match make_objective(
            &current,
            &ObjectiveSpec::LeaderX {
                leader: spec.leader,
            },
        ) {
            Ok(objective) => objective,
            Err(AnalysisError::EmptyObjective) => {
                reason = StopReason::Converged;
                break;
            }
            Err(e) => return Err(e.into()),
        };

        let bounds = Bounds {
            translation: params.translation_bound,
            rotation: spec.rotation_cap.min(ROTATION_BOUND),
        };
        // Min-norm keeps zero-weight DOFs (the leader, every y and
        // theta) from drifting a bound per step on solver whim.
        let t = Instant::now();
        let outcome = solve_rows_min_norm(
            &system.rows,
            &system.d0,
            &objective.weights,
            &bounds.column_bounds(&system.free),
        )?;
        timings.solve += t.elapsed().as_secs_f64();

        let (dq, lp_gain) = match outcome {
            LpOutcome::Optimal {
                displacement,
                objective,
            } => (displacement, objective),
            // Zero displacement satisfies every row we keep, so a solver
            // report of infeasibility is an anomaly worth surfacing.
            LpOutcome::Infeasible => return Err(StepError::Infeasible.into()),
            LpOutcome::Unbounded => {
                reason = StopReason::LpUnbounded;
                break;
            }
        };
        if lp_gain <= min_gain {
            reason = StopReason::Converged;
            break;
        }

        let t = Instant::now();
        let mut accepted = 0.0;
        for &s in params.scale_grid.iter().rev() {
            let candidate = apply_displacement(&current, &dq, s);
            if flock_violation(&candidate, spec) <= params.eta {
                accepted = s;
                current = candidate;
                break;
            }
        }
        timings.search += t.elapsed().as_secs_f64();

        iterations.push(IterationRecord {
            objective: lp_gain,
            scale: accepted,
            violation: flock_violation(&current, spec),
            poses: current.poses(),
        });

        if accepted == 0.0 {
            reason = StopReason::Stalled;
            break;
        }
        if accepted * lp_gain < min_gain {
            reason = StopReason::Converged;
            break;
        }
    }

    timings.total = started.elapsed().as_secs_f64();
    Ok(FlockOutcome {
        trace: StepTrace {
            iterations,
            reason,
            timings,
        },
        scene: current,
    })
}
