//! Free-motion analysis of planar assemblies of rigid polygons.
//!
//! Bodies interact through loose joints: wherever a vertex of one polygon
//! comes within the interaction distance of another polygon's edge, a
//! linearized non-penetration constraint is generated. Stacking all rows
//! gives a sparse polyhedron of instantaneously feasible displacements;
//! linear programs over it answer "how far can this assembly flex", "can
//! it be taken apart", and related design questions. A time stepper
//! re-linearizes and re-solves to follow large motions while keeping the
//! accumulated constraint violation below a budget.
//!
//! Module map:
//! - [`geometry`]: polygons, poses, scenes, contact selection.
//! - [`constraints`]: distance rows, gradients, system assembly.
//! - [`lp`]: objectives and LP solves over the assembled polyhedron.
//! - [`stepper`]: displacement application, line search, iteration.
//! - [`analyses`]: objectives, tolerance search, bracing, flocks.
//! - [`io`]: scene files, trace files, SVG rendering.
//! - [`structures`]: parametric example assemblies.

#![forbid(unsafe_code)]

pub mod analyses;
pub mod constraints;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod stepper;
pub mod structures;
pub mod vec2;

pub use constraints::{
    assemble, assemble_with, AssembleOptions, ConstraintPair, ContactKind, DistanceSystem, FreeMap,
};
pub use error::FlexError;
pub use geometry::{
    inset_polygon, mutually_visible_pairs, select_pairs, Body, CornerKind, Polygon, Pose, Scene,
};
pub use io::{load_scene, parse_scene, render_svg, save_scene, ParsedScene};
pub use lp::{
    classify_separability, solve_flex, solve_separation, Bounds, Displacement, LpOutcome,
    Objective, Provenance, Separability, SeparationSign,
};
pub use stepper::{
    apply_displacement, flex_iterate, line_search, max_violation, FlexOutcome, StepParams,
    StepTrace, StopReason,
};
pub use vec2::Vec2;
