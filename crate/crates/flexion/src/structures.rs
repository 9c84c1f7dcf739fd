//! Ready-made scenes: small calibrated fixtures and parametric families
//! used by tests, benchmarks, and the CLI's demo subcommands.
//!
//! Free bodies are built with centroid-centered local frames so a pose
//! translation reads directly as the motion of the body's material center.
//! Fixed bodies never move, so their polygons are written in world
//! coordinates with identity poses.

use crate::analyses::{
    FlockRobot, FlockSpec, DEFAULT_HALF_ANGLE, DEFAULT_K_NEAREST, DEFAULT_LEADER_HALF_WIDTH,
    DEFAULT_ROTATION_CAP,
};
use crate::geometry::{Body, Polygon, Pose, Scene};
use crate::vec2::Vec2;

/// Default contact gate used by every generator.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Unit square centered on its local origin.
pub fn centered_square() -> Polygon {
    Polygon::rectangle(Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5))
}

/// A free unit block in a snug square cavity.
///
/// The block starts flush against the left and bottom walls; the cavity is
/// `delta` wider and taller than the block, so the only free motions are a
/// slide right by up to `delta`, a slide up by up to `delta`, and nothing
/// else (rotation loses clearance immediately). The walls overrun each
/// other at the cavity corners; fixed-fixed contact is never examined so
/// the overlap is harmless, and it keeps every block corner against an
/// edge interior rather than a wall corner.
pub fn boxed_square(delta: f64) -> Scene {
    assert!(
        delta > 0.0 && delta.is_finite(),
        "cavity slack must be positive"
    );
    let far = 1.5 + delta;
    let bodies = vec![
        Body::new("block", centered_square(), Pose::new(0.5, 0.5, 0.0), false),
        Body::new(
            "wall-left",
            Polygon::rectangle(Vec2::new(-0.5, -0.5), Vec2::new(0.0, far)),
            Pose::IDENTITY,
            true,
        ),
        Body::new(
            "wall-right",
            Polygon::rectangle(Vec2::new(1.0 + delta, -0.5), Vec2::new(far, far)),
            Pose::IDENTITY,
            true,
        ),
        Body::new(
            "wall-bottom",
            Polygon::rectangle(Vec2::new(-0.5, -0.5), Vec2::new(far, 0.0)),
            Pose::IDENTITY,
            true,
        ),
        Body::new(
            "wall-top",
            Polygon::rectangle(Vec2::new(-0.5, 1.0 + delta), Vec2::new(far, far)),
            Pose::IDENTITY,
            true,
        ),
    ];
    Scene::new(bodies, DEFAULT_EPSILON).expect("cavity fixture is a valid scene")
}

/// Two unit squares on a common baseline with a horizontal gap; the left
/// one is fixed, the right one free.
pub fn two_squares(gap: f64) -> Scene {
    assert!(gap >= 0.0 && gap.is_finite(), "gap must be non-negative");
    let bodies = vec![
        Body::new("left", centered_square(), Pose::new(0.5, 0.5, 0.0), true),
        Body::new(
            "right",
            centered_square(),
            Pose::new(1.5 + gap, 0.5, 0.0),
            false,
        ),
    ];
    Scene::new(bodies, DEFAULT_EPSILON).expect("two-square fixture is a valid scene")
}

/// A U-shaped fixed frame holding `n - 1` free unit blocks in a near-square
/// grid, every block `gap` away from its neighbors and from the left and
/// bottom frame walls, with `gap` of spare width at the right wall.
///
/// The frame is open at the top, so the assembly's free motions are small
/// shuffles within the gaps plus an unbounded escape upward; a rightward
/// flex converges in a few steps as the columns pack against the right
/// wall.
pub fn grid_structure(n: usize, gap: f64) -> Scene {
    assert!(n >= 2, "need at least the frame and one block");
    assert!(gap > 0.0 && gap.is_finite(), "gap must be positive");
    let blocks = n - 1;
    let cols = (blocks as f64).sqrt().ceil() as usize;
    let rows = blocks.div_ceil(cols);
    let pitch = 1.0 + gap;
    let width = gap + cols as f64 * pitch;
    let height = gap + rows as f64 * pitch + 0.5;
    let t = 0.5;

    let frame = Polygon::new(vec![
        Vec2::new(-t, -t),
        Vec2::new(width + t, -t),
        Vec2::new(width + t, height),
        Vec2::new(width, height),
        Vec2::new(width, 0.0),
        Vec2::new(0.0, 0.0),
        Vec2::new(0.0, height),
        Vec2::new(-t, height),
    ])
    .expect("frame outline is a simple polygon");

    let mut bodies = vec![Body::new("frame", frame, Pose::IDENTITY, true)];
    for i in 0..blocks {
        let r = i / cols;
        let c = i % cols;
        let x = gap + c as f64 * pitch + 0.5;
        let y = gap + r as f64 * pitch + 0.5;
        bodies.push(Body::new(
            format!("block-{r}-{c}"),
            centered_square(),
            Pose::new(x, y, 0.0),
            false,
        ));
    }
    Scene::new(bodies, DEFAULT_EPSILON).expect("grid fixture is a valid scene")
}

/// A fixed unit square and a free one shifted diagonally past its
/// top-right corner, with corner-to-corner clearance 0.02 sqrt(2).
///
/// The free square can slide away along either axis without touching the
/// fixed one, but only corner-averaged rows linearize that correctly; the
/// two raw edge rows each forbid one of the escapes.
pub fn corner_relaxation_pair() -> Scene {
    let bodies = vec![
        Body::new("anchor", centered_square(), Pose::new(0.5, 0.5, 0.0), true),
        Body::new(
            "floater",
            centered_square(),
            Pose::new(1.52, 1.52, 0.0),
            false,
        ),
    ];
    Scene::new(bodies, DEFAULT_EPSILON).expect("corner fixture is a valid scene")
}

/// A `rows x cols` flock of unit-square robots on a 4.0 pitch, wired as a
/// tree toward the central robot: each robot watches the neighbor one cell
/// closer to the leader's column, then one cell closer along the column.
/// Cameras sit at each robot's center looking straight at the watched
/// robot's center marker.
pub fn flock_grid(rows: usize, cols: usize) -> (Scene, FlockSpec) {
    assert!(rows >= 1 && cols >= 1, "flock needs at least one robot");
    assert!(rows * cols >= 2, "flock needs at least two robots");
    const SPACING: f64 = 4.0;
    let leader_r = rows / 2;
    let leader_c = cols / 2;
    let leader = leader_r * cols + leader_c;

    let mut bodies = Vec::with_capacity(rows * cols);
    let mut robots = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let here = Vec2::new(c as f64 * SPACING, r as f64 * SPACING);
            bodies.push(Body::new(
                format!("robot-{r}-{c}"),
                centered_square(),
                Pose::new(here.x, here.y, 0.0),
                false,
            ));
            let pred_cell = if c != leader_c {
                Some((r, if c < leader_c { c + 1 } else { c - 1 }))
            } else if r != leader_r {
                Some((if r < leader_r { r + 1 } else { r - 1 }, c))
            } else {
                None
            };
            let (predecessor, camera_axis) = match pred_cell {
                Some((pr, pc)) => {
                    let there = Vec2::new(pc as f64 * SPACING, pr as f64 * SPACING);
                    let toward = there - here;
                    (Some(pr * cols + pc), toward.y.atan2(toward.x))
                }
                None => (None, 0.0),
            };
            robots.push(FlockRobot {
                predecessor,
                camera_apex: Vec2::ZERO,
                camera_axis,
                half_angle: DEFAULT_HALF_ANGLE,
                marker: Vec2::ZERO,
            });
        }
    }
    let scene = Scene::new(bodies, DEFAULT_EPSILON).expect("flock grid is a valid scene");
    let spec = FlockSpec {
        robots,
        leader,
        k_nearest: DEFAULT_K_NEAREST,
        rotation_cap: DEFAULT_ROTATION_CAP,
        leader_half_width: DEFAULT_LEADER_HALF_WIDTH,
    };
    (scene, spec)
}
