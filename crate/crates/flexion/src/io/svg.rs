//! Minimal deterministic SVG rendering of scenes.
//!
//! One call draws a scene; passing a second scene overlays its free bodies
//! in red on top, which makes a before/after pair readable at a glance.
//! Output is plain shapes with fixed six-decimal formatting so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::IoError;
use crate::geometry::Scene;
use crate::vec2::Vec2;

const FREE_FILL: &str = "#d0d7e3";
const FIXED_FILL: &str = "#9aa4b5";
const OVERLAY_FILL: &str = "#d9534f";
const STROKE: &str = "#30343b";

/// Render a scene, optionally overlaying the free bodies of `after`.
pub fn render_svg(before: &Scene, after: Option<&Scene>) -> String {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut extend = |scene: &Scene| {
        for body in &scene.bodies {
            for v in body.world_vertices() {
                lo.x = lo.x.min(v.x);
                lo.y = lo.y.min(v.y);
                hi.x = hi.x.max(v.x);
                hi.y = hi.y.max(v.y);
            }
        }
    };
    extend(before);
    if let Some(after) = after {
        extend(after);
    }
    let span = (hi - lo).norm().max(1e-9);
    let margin = 0.05 * span;
    lo = lo - Vec2::new(margin, margin);
    hi += Vec2::new(margin, margin);
    let size = hi - lo;
    let stroke_width = 0.004 * span;

    // SVG y grows downward; flip about the box's vertical center.
    let place = |v: Vec2| (v.x - lo.x, hi.y - v.y);
    let polygon = |out: &mut String, body: &crate::geometry::Body, fill: &str, opacity: f64| {
        let mut points = String::new();
        for v in body.world_vertices() {
            let (x, y) = place(v);
            let _ = write!(points, "{x:.6},{y:.6} ");
        }
        let _ = writeln!(
            out,
            r#"  <polygon points="{}" fill="{fill}" fill-opacity="{opacity:.6}" stroke="{STROKE}" stroke-width="{stroke_width:.6}"/>"#,
            points.trim_end()
        );
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {:.6} {:.6}">"#,
        size.x, size.y
    );
    let _ = writeln!(out, r#"  <!-- {} bodies -->"#, before.bodies.len());
    for body in &before.bodies {
        let fill = if body.fixed { FIXED_FILL } else { FREE_FILL };
        polygon(&mut out, body, fill, 1.0);
    }
    if let Some(after) = after {
        for body in &after.bodies {
            if !body.fixed {
                polygon(&mut out, body, OVERLAY_FILL, 0.55);
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, before: &Scene, after: Option<&Scene>) -> Result<(), IoError> {
    fs::write(path, render_svg(before, after))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures;

    #[test]
    fn deterministic_and_complete() {
        let scene = structures::boxed_square(0.05);
        let a = render_svg(&scene, None);
        let b = render_svg(&scene, None);
        assert_eq!(a, b);
        assert_eq!(a.matches("<polygon").count(), 5);
        assert!(a.contains(FIXED_FILL) && a.contains(FREE_FILL));
        assert!(!a.contains(OVERLAY_FILL));
    }

    #[test]
    fn overlay_draws_free_bodies_only() {
        let scene = structures::boxed_square(0.05);
        let mut after = scene.clone();
        after.bodies[0].pose.x += 0.05;
        let svg = render_svg(&scene, Some(&after));
        // 5 base polygons plus 1 overlaid free block.
        assert_eq!(svg.matches("<polygon").count(), 6);
        assert!(svg.contains(OVERLAY_FILL));
    }
}
