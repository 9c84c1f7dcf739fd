//! Linear programming over the constraint polyhedron.
//!
//! Every solve maximizes a linear functional of the stacked displacement
//! vector subject to J dq + d0 >= 0 and per-DOF box bounds. The backend is
//! the pure-Rust simplex solver from the minilp crate; problems here are
//! small and sparse, with six structural entries per row.

use crate::constraints::{DistanceSystem, FreeMap, SparseMatrix};
use crate::error::{FlexError, LpError};
use crate::geometry::Scene;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default displacement bounds relative to the interaction distance: ten
/// epsilon of translation keeps steps in the regime where the
/// linearization is trustworthy, and half a radian of rotation is far past
/// the point where it stops being.
pub const TRANSLATION_BOUND_FACTOR: f64 = 10.0;
pub const ROTATION_BOUND: f64 = 0.5;

/// Constraint satisfaction slack accepted when checking solutions.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Relative size of the displacement-norm penalty in [`solve_rows_min_norm`]:
/// small enough that one unit of weighted objective outweighs the entire
/// norm budget, large enough to register against the solver's tolerances.
const NORM_PENALTY: f64 = 1e-7;

/// Default magnitude for the separation translation-sum target.
pub const SEPARATION_K: f64 = 1e6;

/// Symmetric per-DOF bounds on one step's displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub translation: f64,
    pub rotation: f64,
}

impl Bounds {
    pub fn from_epsilon(epsilon: f64) -> Bounds {
        Bounds {
            translation: TRANSLATION_BOUND_FACTOR * epsilon,
            rotation: ROTATION_BOUND,
        }
    }

    pub fn halved(&self) -> Bounds {
        Bounds {
            translation: 0.5 * self.translation,
            rotation: 0.5 * self.rotation,
        }
    }

    /// Per-column bound vector over a free map (x, y, theta per body).
    pub fn column_bounds(&self, free: &FreeMap) -> Vec<f64> {
        let mut out = Vec::with_capacity(free.ncols());
        for _ in 0..free.free_count() {
            out.push(self.translation);
            out.push(self.translation);
            out.push(self.rotation);
        }
        out
    }
}

/// How an objective vector came to be; recorded in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Direct,
    Direction,
    Radial,
    LeaderX,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Direct => "direct",
            Provenance::Direction => "direction",
            Provenance::Radial => "radial",
            Provenance::LeaderX => "leader-x",
        };
        f.write_str(s)
    }
}

/// A maximization objective over the displacement columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub weights: Vec<f64>,
    pub provenance: Provenance,
}

impl Objective {
    /// Wrap caller-supplied weights, rejecting all-zero or non-finite input.
    pub fn direct(weights: Vec<f64>) -> Result<Objective, LpError> {
        if weights.iter().any(|w| !w.is_finite()) || weights.iter().all(|w| *w == 0.0) {
            return Err(LpError::ZeroObjective);
        }
        Ok(Objective {
            weights,
            provenance: Provenance::Direct,
        })
    }
}

/// An optimal displacement of the free bodies, indexed like the free map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    values: Vec<f64>,
}

impl Displacement {
    pub fn new(values: Vec<f64>) -> Displacement {
        Displacement { values }
    }

    pub fn zero(ncols: usize) -> Displacement {
        Displacement {
            values: vec![0.0; ncols],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// (dx, dy, dtheta) of one body, or None when it is fixed.
    pub fn body_delta(&self, free: &FreeMap, body: usize) -> Option<(f64, f64, f64)> {
        free.block(body).map(|b| {
            (
                self.values[3 * b],
                self.values[3 * b + 1],
                self.values[3 * b + 2],
            )
        })
    }

    pub fn scaled(&self, s: f64) -> Displacement {
        Displacement {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Outcome of one LP solve.
#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal {
        displacement: Displacement,
        objective: f64,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Displacement, f64)> {
        match self {
            LpOutcome::Optimal {
                displacement,
                objective,
            } => Some((displacement, objective)),
            _ => None,
        }
    }
}

/// Maximize `objective` over the feasible displacements of an assembled
/// system. `bounds` defaults to the epsilon-derived box. Ties among optimal
/// vertices are broken toward the smallest total displacement (see
/// [`solve_rows_min_norm`]), so degrees of freedom the objective ignores
/// stay put instead of landing on arbitrary polytope vertices.
pub fn solve_flex(
    system: &DistanceSystem,
    objective: &Objective,
    bounds: Option<Bounds>,
) -> Result<LpOutcome, LpError> {
    let bounds = bounds.unwrap_or_else(|| Bounds::from_epsilon(system.epsilon));
    let cols = bounds.column_bounds(&system.free);
    solve_rows_min_norm(&system.jacobian, &system.d0, &objective.weights, &cols)
}

/// Low-level entry: maximize `weights` subject to `jacobian dq + d0 >= 0`
/// and symmetric per-column bounds.
pub fn solve_rows(
    jacobian: &SparseMatrix,
    d0: &[f64],
    weights: &[f64],
    col_bounds: &[f64],
) -> Result<LpOutcome, LpError> {
    backend_selected()?;
    let ncols = jacobian.ncols();
    if weights.len() != ncols {
        return Err(LpError::ObjectiveLength {
            got: weights.len(),
            want: ncols,
        });
    }
    assert_eq!(col_bounds.len(), ncols, "bound vector length mismatch");
    assert_eq!(
        d0.len(),
        jacobian.nrows(),
        "distance vector length mismatch"
    );

    if ncols == 0 {
        // Nothing can move; the system is feasible iff nothing is violated.
        return Ok(if d0.iter().any(|d| *d < -FEASIBILITY_TOL) {
            LpOutcome::Infeasible
        } else {
            LpOutcome::Optimal {
                displacement: Displacement::zero(0),
                objective: 0.0,
            }
        });
    }

    let mut problem = minilp::Problem::new(minilp::OptimizationDirection::Maximize);
    let vars: Vec<minilp::Variable> = (0..ncols)
        .map(|j| problem.add_var(weights[j], (-col_bounds[j], col_bounds[j])))
        .collect();
    for (row, &d) in jacobian.rows().zip(d0) {
        if row.is_empty() {
            // All participants fixed; the row is a constant.
            if d < -FEASIBILITY_TOL {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        let terms: Vec<(minilp::Variable, f64)> = row.iter().map(|&(c, v)| (vars[c], v)).collect();
        problem.add_constraint(&terms[..], minilp::ComparisonOp::Ge, -d);
    }
    match guarded_solve(problem)? {
        Ok(solution) => {
            let values: Vec<f64> = vars.iter().map(|v| solution[*v]).collect();
            // Infinite box bounds can slip an infinite "optimum" past the
            // backend's own ray detection.
            if values.iter().any(|v| !v.is_finite()) {
                return Ok(LpOutcome::Unbounded);
            }
            Ok(LpOutcome::Optimal {
                objective: solution.objective(),
                displacement: Displacement::new(values),
            })
        }
        Err(minilp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
        Err(minilp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
    }
}

/// Like [`solve_rows`], but ties among the optimal displacements are broken
/// toward the smallest total (L1) motion.
///
/// A plain simplex solve parks degrees of freedom the objective is
/// indifferent to at arbitrary vertex values, typically a box bound. Under
/// repeated stepping that reads as wander: bodies with zero weight drift a
/// full bound per iteration. The cure is a tiny penalty on auxiliary
/// variables t_j >= |dq_j|, solved in the same LP; motion not needed for
/// optimality or feasibility then costs norm and is removed. The penalty
/// is sized so one unit of weighted gain always outweighs the whole norm
/// budget, and the reported objective is re-computed without it.
pub fn solve_rows_min_norm(
    jacobian: &SparseMatrix,
    d0: &[f64],
    weights: &[f64],
    col_bounds: &[f64],
) -> Result<LpOutcome, LpError> {
    backend_selected()?;
    let ncols = jacobian.ncols();
    if weights.len() != ncols {
        return Err(LpError::ObjectiveLength {
            got: weights.len(),
            want: ncols,
        });
    }
    assert_eq!(col_bounds.len(), ncols, "bound vector length mismatch");
    assert_eq!(
        d0.len(),
        jacobian.nrows(),
        "distance vector length mismatch"
    );

    if ncols == 0 {
        return solve_rows(jacobian, d0, weights, col_bounds);
    }
    let lambda = NORM_PENALTY * weights.iter().fold(1.0_f64, |m, w| m.max(w.abs()));

    let mut problem = minilp::Problem::new(minilp::OptimizationDirection::Maximize);
    let vars: Vec<minilp::Variable> = (0..ncols)
        .map(|j| problem.add_var(weights[j], (-col_bounds[j], col_bounds[j])))
        .collect();
    let abs: Vec<minilp::Variable> = (0..ncols)
        .map(|j| problem.add_var(-lambda, (0.0, col_bounds[j])))
        .collect();
    for (row, &d) in jacobian.rows().zip(d0) {
        if row.is_empty() {
            if d < -FEASIBILITY_TOL {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        let terms: Vec<(minilp::Variable, f64)> = row.iter().map(|&(c, v)| (vars[c], v)).collect();
        problem.add_constraint(&terms[..], minilp::ComparisonOp::Ge, -d);
    }
    for j in 0..ncols {
        problem.add_constraint(
            &[(abs[j], 1.0), (vars[j], -1.0)][..],
            minilp::ComparisonOp::Ge,
            0.0,
        );
        problem.add_constraint(
            &[(abs[j], 1.0), (vars[j], 1.0)][..],
            minilp::ComparisonOp::Ge,
            0.0,
        );
    }
    match guarded_solve(problem) {
        Ok(Ok(solution)) => {
            let values: Vec<f64> = vars.iter().map(|v| solution[*v]).collect();
            // Infinite box bounds can slip an infinite "optimum" past the
            // backend's own ray detection.
            if values.iter().any(|v| !v.is_finite()) {
                return Ok(LpOutcome::Unbounded);
            }
            let objective = weights.iter().zip(&values).map(|(w, v)| w * v).sum();
            Ok(LpOutcome::Optimal {
                objective,
                displacement: Displacement::new(values),
            })
        }
        Ok(Err(minilp::Error::Infeasible)) => Ok(LpOutcome::Infeasible),
        Ok(Err(minilp::Error::Unbounded)) => Ok(LpOutcome::Unbounded),
        // The penalty form is best-effort; on backend trouble fall back to
        // the plain solve, whose vertex is a valid optimum.
        Err(_) => solve_rows(jacobian, d0, weights, col_bounds),
    }
}

/// The backend panics on some degenerate bases instead of returning an
/// error; contain that so callers see a backend failure, not an abort.
fn guarded_solve(
    problem: minilp::Problem,
) -> Result<Result<minilp::Solution, minilp::Error>, LpError> {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(move || problem.solve()))
        .map_err(|_| LpError::Backend("the solver panicked on a degenerate basis".into()))
}

/// Which side the separation probe pushes the translation sum toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparationSign {
    Plus,
    Minus,
}

impl fmt::Display for SeparationSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeparationSign::Plus => "+",
            SeparationSign::Minus => "-",
        })
    }
}

/// Probe for a gross separating motion: require the summed translation
/// components of all free bodies to land in [k, 2k] (sign +) or [-2k, -k]
/// (sign -), far beyond any jammed configuration's reach, while every
/// contact row stays satisfied. Translation bounds are widened to 2k for
/// this solve; rotations keep the usual cap.
pub fn solve_separation(
    system: &DistanceSystem,
    k: f64,
    sign: SeparationSign,
) -> Result<LpOutcome, LpError> {
    assert!(
        k.is_finite() && k > 0.0,
        "separation target must be positive"
    );
    let ncols = system.ncols();
    let sgn = match sign {
        SeparationSign::Plus => 1.0,
        SeparationSign::Minus => -1.0,
    };

    // Rebuild the row list with the two window rows appended:
    //   sign +:  sum - k >= 0   and   2k - sum >= 0
    //   sign -: -sum - k >= 0   and   2k + sum >= 0
    let mut jacobian = system.jacobian.clone();
    let mut d0 = system.d0.clone();
    let translation_cols: Vec<usize> = (0..system.free.free_count())
        .flat_map(|b| [3 * b, 3 * b + 1])
        .collect();
    jacobian.push_row(translation_cols.iter().map(|&c| (c, sgn)).collect());
    d0.push(-k);
    jacobian.push_row(translation_cols.iter().map(|&c| (c, -sgn)).collect());
    d0.push(2.0 * k);

    let mut weights = vec![0.0; ncols];
    for &c in &translation_cols {
        weights[c] = sgn;
    }
    let mut col_bounds = Bounds {
        translation: 2.0 * k,
        rotation: ROTATION_BOUND,
    }
    .column_bounds(&system.free);
    col_bounds.truncate(ncols);
    solve_rows(&jacobian, &d0, &weights, &col_bounds)
}

/// Verdict of the separation probe over both signs.
#[derive(Clone, Debug)]
pub enum Separability {
    Separable {
        sign: SeparationSign,
        displacement: Displacement,
    },
    Inseparable,
}

/// Classify whether any gross separating motion exists at the linearized
/// configuration, trying the positive window first.
pub fn classify_separability(scene: &Scene, k: f64) -> Result<Separability, FlexError> {
    let system = crate::constraints::assemble(scene)?;
    for sign in [SeparationSign::Plus, SeparationSign::Minus] {
        match solve_separation(&system, k, sign)? {
            LpOutcome::Optimal { displacement, .. } => {
                return Ok(Separability::Separable { sign, displacement });
            }
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                // The window rows bound the objective; treat this as a
                // backend anomaly rather than a verdict.
                return Err(LpError::Backend(
                    "separation probe reported unbounded despite window rows".into(),
                )
                .into());
            }
        }
    }
    Ok(Separability::Inseparable)
}

fn backend_selected() -> Result<(), LpError> {
    match std::env::var("FLEXION_SOLVER") {
        Err(_) => validate_backend_name(None),
        Ok(name) => validate_backend_name(Some(&name)),
    }
}

fn validate_backend_name(name: Option<&str>) -> Result<(), LpError> {
    match name {
        None | Some("") | Some("minilp") => Ok(()),
        Some(other) => Err(LpError::UnknownBackend(other.to_string())),
    }
}
