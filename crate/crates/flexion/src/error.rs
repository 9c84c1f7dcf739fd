use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has a non-finite coordinate")]
    NonFinite,
    #[error("edge {0} has zero length")]
    ZeroLengthEdge(usize),
    #[error("polygon boundary self-intersects (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("inset by {inset} collapses the polygon near vertex {vertex}")]
    InsetCollapse { inset: f64, vertex: usize },
    #[error("inset must be finite and non-negative, got {0}")]
    BadInset(f64),
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene has no bodies")]
    Empty,
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("body {0:?} appears twice")]
    DuplicateName(String),
    #[error("body {0:?}: {1}")]
    BadBody(String, #[source] GeometryError),
    #[error(
        "vertex {vertex} of body {vertex_body:?} penetrates body {edge_body:?} by {depth:.3e}"
    )]
    Penetration {
        edge_body: String,
        vertex_body: String,
        vertex: usize,
        depth: f64,
    },
    #[error("bodies {a:?} and {b:?} overlap by about {depth:.3e}")]
    Overlap { a: String, b: String, depth: f64 },
}

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("averaged corner normal is degenerate (opposing edge normals) at vertex {vertex} of body {body}")]
    DegenerateCorner { body: usize, vertex: usize },
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("objective has no nonzero coefficient")]
    ZeroObjective,
    #[error("objective has {got} coefficients but the system has {want} columns")]
    ObjectiveLength { got: usize, want: usize },
    #[error("unknown LP backend {0:?} (supported: minilp)")]
    UnknownBackend(String),
    #[error("LP backend failed: {0}")]
    Backend(String),
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("invalid step parameters: {0}")]
    BadParams(String),
    #[error("constraint system is infeasible at the current configuration")]
    Infeasible,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no body named {0:?}")]
    UnknownBody(String),
    #[error("body index {0} out of range")]
    BodyOutOfRange(usize),
    #[error("objective selects no free degree of freedom")]
    EmptyObjective,
    #[error("no mutually visible vertex pairs between distinct bodies")]
    NoVisiblePairs,
    #[error("displacement threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("tolerance upper bound must be positive, got {0}")]
    BadToleranceRange(f64),
    #[error("scenes disagree: {0}")]
    SceneMismatch(String),
}

#[derive(Debug, Error)]
pub enum FlockError {
    #[error("flock spec lists {got} robots but the scene has {want} bodies")]
    LengthMismatch { got: usize, want: usize },
    #[error("leader index {0} out of range")]
    BadLeader(usize),
    #[error("robot {0} has no predecessor and is not the leader")]
    MissingPredecessor(usize),
    #[error("robot {0} is the leader but has a predecessor")]
    LeaderHasPredecessor(usize),
    #[error("predecessor graph is not a tree rooted at the leader (cycle through robot {0})")]
    NotATree(usize),
    #[error("camera half-angle of robot {0} must lie in (0, pi/2), got {1}")]
    BadHalfAngle(usize, f64),
    #[error(
        "marker of robot {observer}'s predecessor starts outside its view cone by {violation:.3e}"
    )]
    MarkerOutsideCone { observer: usize, violation: f64 },
    #[error("k_nearest must be at least 1")]
    BadK,
    #[error("rotation cap must be positive and finite, got {0}")]
    BadRotationCap(f64),
    #[error("leader box half-width must be positive and finite, got {0}")]
    BadLeaderBox(f64),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("scene file version {0} is not supported (expected 1)")]
    UnsupportedVersion(u32),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("body {name:?}: pose angle must be finite")]
    BadPose { name: String },
    #[error("bounds must be positive and finite")]
    BadBounds,
    #[error("flock section: {0}")]
    Flock(#[from] FlockError),
    #[error("trace file version {0} is not supported (expected 1)")]
    UnsupportedTraceVersion(u32),
    #[error("trace has no iterations")]
    EmptyTrace,
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Umbrella error for the high-level pipeline entry points.
#[derive(Debug, Error)]
pub enum FlexError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Flock(#[from] FlockError),
    #[error(transparent)]
    Io(#[from] IoError),
}
