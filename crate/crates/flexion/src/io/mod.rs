//! Reading and writing scenes, step traces, and SVG snapshots.

pub mod scene_file;
pub mod svg;
pub mod trace_file;

pub use scene_file::{
    load_scene, parse_scene, save_scene, scene_to_json, BodyDoc, ParsedScene, SceneDoc,
    SCENE_VERSION,
};
pub use svg::{render_svg, write_svg};
pub use trace_file::{
    parse_trace, read_trace, trace_to_json, write_trace, ObjectiveDoc, TraceFile, TRACE_VERSION,
};
