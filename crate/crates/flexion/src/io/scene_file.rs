//! JSON scene files.
//!
//! A scene file is a single JSON object:
//!
//! ```json
//! {
//!   "version": 1,
//!   "epsilon": 0.1,
//!   "bounds": { "translation": 1.0, "rotation": 0.5 },
//!   "bodies": [
//!     {
//!       "name": "block",
//!       "vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]],
//!       "pose": { "x": 0.5, "y": 0.5, "theta": 0.0 },
//!       "fixed": false
//!     }
//!   ],
//!   "flock": { "robots": [...], "leader": 0 }
//! }
//! ```
//!
//! `epsilon` defaults to 0.1, poses to identity, `fixed` to false;
//! `bounds` and `flock` are optional. Vertices are body-local and should
//! wind counter-clockwise; clockwise outlines are accepted, reversed, and
//! reported as a warning. Angles are radians. Unknown keys are rejected so
//! typos don't silently vanish.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analyses::FlockSpec;
use crate::constraints::PENETRATION_TOL;
use crate::error::{IoError, SceneError};
use crate::geometry::{check_clearance, signed_area, Body, Polygon, Pose, Scene};
use crate::lp::Bounds;
use crate::vec2::Vec2;

pub const SCENE_VERSION: u32 = 1;

fn default_epsilon() -> f64 {
    0.1
}

fn identity_pose() -> Pose {
    Pose::IDENTITY
}

/// Wire form of one body.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDoc {
    pub name: String,
    pub vertices: Vec<Vec2>,
    #[serde(default = "identity_pose")]
    pub pose: Pose,
    #[serde(default)]
    pub fixed: bool,
}

/// Wire form of a whole scene file; also embedded in trace files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub version: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    pub bodies: Vec<BodyDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flock: Option<FlockSpec>,
}

/// A validated scene plus the optional sections riding along with it.
#[derive(Clone, Debug)]
pub struct ParsedScene {
    pub scene: Scene,
    pub bounds: Option<Bounds>,
    pub flock: Option<FlockSpec>,
    /// Non-fatal repairs applied during parsing, one line each.
    pub warnings: Vec<String>,
}

/// Capture a live scene (and optional sections) as a wire document.
pub fn to_doc(scene: &Scene, bounds: Option<Bounds>, flock: Option<&FlockSpec>) -> SceneDoc {
    SceneDoc {
        version: SCENE_VERSION,
        epsilon: scene.epsilon,
        bounds,
        bodies: scene
            .bodies
            .iter()
            .map(|b| BodyDoc {
                name: b.name.clone(),
                vertices: b.polygon.vertices().to_vec(),
                pose: b.pose,
                fixed: b.fixed,
            })
            .collect(),
        flock: flock.cloned(),
    }
}

/// Validate a wire document into a live scene.
pub fn realize(doc: SceneDoc) -> Result<ParsedScene, IoError> {
    if doc.version != SCENE_VERSION {
        return Err(IoError::UnsupportedVersion(doc.version));
    }
    if let Some(b) = doc.bounds {
        let ok = b.translation > 0.0
            && b.translation.is_finite()
            && b.rotation > 0.0
            && b.rotation.is_finite();
        if !ok {
            return Err(IoError::BadBounds);
        }
    }
    let mut warnings = Vec::new();
    let mut bodies = Vec::with_capacity(doc.bodies.len());
    for body in doc.bodies {
        let finite =
            body.pose.x.is_finite() && body.pose.y.is_finite() && body.pose.theta.is_finite();
        if !finite {
            return Err(IoError::BadPose { name: body.name });
        }
        if body.vertices.len() >= 3 && signed_area(&body.vertices) < 0.0 {
            warnings.push(format!(
                "body {:?}: clockwise outline reversed to counter-clockwise",
                body.name
            ));
        }
        let polygon =
            Polygon::new(body.vertices).map_err(|e| SceneError::BadBody(body.name.clone(), e))?;
        bodies.push(Body::new(body.name, polygon, body.pose, body.fixed));
    }
    let scene = Scene::new(bodies, doc.epsilon).map_err(IoError::Scene)?;
    check_clearance(&scene, PENETRATION_TOL).map_err(IoError::Scene)?;
    if let Some(flock) = &doc.flock {
        flock.validate(&scene)?;
    }
    Ok(ParsedScene {
        scene,
        bounds: doc.bounds,
        flock: doc.flock,
        warnings,
    })
}

/// Parse and validate a scene file from JSON text.
pub fn parse_scene(text: &str) -> Result<ParsedScene, IoError> {
    realize(serde_json::from_str(text)?)
}

/// Serialize a scene (and optional sections) as pretty JSON.
pub fn scene_to_json(scene: &Scene, bounds: Option<Bounds>, flock: Option<&FlockSpec>) -> String {
    let doc = to_doc(scene, bounds, flock);
    serde_json::to_string_pretty(&doc).expect("scene documents serialize") + "\n"
}

pub fn load_scene(path: &Path) -> Result<ParsedScene, IoError> {
    parse_scene(&fs::read_to_string(path)?)
}

pub fn save_scene(
    path: &Path,
    scene: &Scene,
    bounds: Option<Bounds>,
    flock: Option<&FlockSpec>,
) -> Result<(), IoError> {
    fs::write(path, scene_to_json(scene, bounds, flock))?;
    Ok(())
}
