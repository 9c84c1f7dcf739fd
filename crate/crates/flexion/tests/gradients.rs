//! Finite-difference validation of every analytic gradient the assembler
//! produces.
//!
//! The distance of a constraint pair is an exact function of the two poses
//! (the half-plane is fixed in the host body's local frame), so central
//! differences over each pose DOF must reproduce the stored Jacobian row.
//! Configurations are drawn from a seeded RNG: two bodies with randomized
//! outlines, poses, and separations near the interaction distance.

use flexion::constraints::{
    assemble_with, eval_half_plane, pair_distance, AssembleOptions, FreeMap, HalfPlane,
};
use flexion::geometry::{Body, Polygon, Pose, Scene};
use flexion::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;
const REL_TOL: f64 = 1e-6;
const EPSILON: f64 = 0.3;

/// Relative error with a unit floor, so near-zero entries are compared
/// absolutely.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0_f64.max(a.abs()).max(b.abs())
}

/// Convex polygon with jittered radii: always simple, always CCW.
fn random_polygon(rng: &mut ChaCha8Rng) -> Polygon {
    if rng.gen_bool(0.4) {
        let w = rng.gen_range(0.5..2.0);
        let h = rng.gen_range(0.5..2.0);
        Polygon::rectangle(Vec2::new(-0.5 * w, -0.5 * h), Vec2::new(0.5 * w, 0.5 * h))
    } else {
        let sides = rng.gen_range(3..8);
        let base = rng.gen_range(0.4..1.2);
        let vertices = (0..sides)
            .map(|i| {
                let angle = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
                let r = base * rng.gen_range(0.85..1.15);
                Vec2::new(r * angle.cos(), r * angle.sin())
            })
            .collect();
        Polygon::new(vertices).expect("jittered star-shaped loop is simple")
    }
}

/// Outline radius, for placing the second body near contact.
fn radius(p: &Polygon) -> f64 {
    (0..p.vertex_count())
        .map(|i| p.vertex(i).norm())
        .fold(0.0, f64::max)
}

fn random_pair_scene(rng: &mut ChaCha8Rng) -> Scene {
    let pa = random_polygon(rng);
    let pb = random_polygon(rng);
    let gap = rng.gen_range(-0.05..EPSILON);
    let dist = radius(&pa) + radius(&pb) + gap;
    let dir = rng.gen_range(0.0..std::f64::consts::TAU);
    let a = Body::new(
        "a",
        pa,
        Pose::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-3.0..3.0),
        ),
        false,
    );
    let offset = Vec2::new(dist * dir.cos(), dist * dir.sin());
    let b = Body::new(
        "b",
        pb,
        Pose::new(
            a.pose.x + offset.x,
            a.pose.y + offset.y,
            rng.gen_range(-3.0..3.0),
        ),
        false,
    );
    Scene::new(vec![a, b], EPSILON).expect("two finite bodies form a scene")
}

fn perturbed(scene: &Scene, col: usize, delta: f64) -> Scene {
    let mut out = scene.clone();
    let body = col / 3;
    match col % 3 {
        0 => out.bodies[body].pose.x += delta,
        1 => out.bodies[body].pose.y += delta,
        _ => out.bodies[body].pose.theta += delta,
    }
    out
}

#[test]
fn assembled_jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1e2d3c);
    let mut checked_configs = 0;
    let mut checked_entries = 0usize;
    let mut corner_rows = 0usize;
    let mut attempts = 0;
    // Penetration is in scope for the property; measure instead of erroring.
    let options = AssembleOptions {
        penetration_allowance: f64::INFINITY,
        corner_rows: true,
    };

    while checked_configs < 1000 {
        attempts += 1;
        assert!(
            attempts < 20_000,
            "generator failed to reach 1000 constrained configs"
        );
        let scene = random_pair_scene(&mut rng);
        let system = assemble_with(&scene, options).expect("assembly succeeds");
        if system.nrows() == 0 {
            continue;
        }
        checked_configs += 1;

        for (k, pair) in system.pairs.iter().enumerate() {
            if matches!(
                pair.contact,
                flexion::constraints::ContactKind::Corner { .. }
            ) {
                corner_rows += 1;
            }
            let mut dense = vec![0.0; system.ncols()];
            for &(c, v) in system.jacobian.row(k) {
                dense[c] = v;
            }
            for (col, &analytic) in dense.iter().enumerate() {
                let plus = pair_distance(&perturbed(&scene, col, H), pair).unwrap();
                let minus = pair_distance(&perturbed(&scene, col, -H), pair).unwrap();
                let fd = (plus - minus) / (2.0 * H);
                let err = rel_err(analytic, fd);
                assert!(
                    err < REL_TOL,
                    "config {checked_configs} row {k} col {col}: \
                     analytic {analytic} vs fd {fd} (err {err:.3e})"
                );
                checked_entries += 1;
            }
        }
    }
    // The draw ranges make both row kinds appear many times.
    assert!(checked_entries > 10_000, "{checked_entries} entries");
    assert!(corner_rows > 50, "only {corner_rows} corner rows seen");
}

/// The same check one level down: the half-plane kernel's per-DOF gradients
/// against differences of its own value, over arbitrary planes (this is
/// what the flock cone rows instantiate).
#[test]
fn half_plane_kernel_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..1000 {
        let plane = HalfPlane {
            anchor: Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            normal: Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                .normalized(1e-9)
                .unwrap_or(Vec2::new(1.0, 0.0)),
        };
        let point = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let host = Pose::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let owner = Pose::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );

        let eval = eval_half_plane(&host, &plane, &owner, point);
        let value = |host: &Pose, owner: &Pose| eval_half_plane(host, &plane, owner, point).value;

        let bump = |pose: &Pose, dof: usize, delta: f64| {
            let mut p = *pose;
            match dof {
                0 => p.x += delta,
                1 => p.y += delta,
                _ => p.theta += delta,
            }
            p
        };
        for dof in 0..3 {
            let fd_host = (value(&bump(&host, dof, H), &owner)
                - value(&bump(&host, dof, -H), &owner))
                / (2.0 * H);
            let fd_owner = (value(&host, &bump(&owner, dof, H))
                - value(&host, &bump(&owner, dof, -H)))
                / (2.0 * H);
            assert!(
                rel_err(eval.host[dof], fd_host) < REL_TOL,
                "case {case} host dof {dof}: {} vs {fd_host}",
                eval.host[dof]
            );
            assert!(
                rel_err(eval.point[dof], fd_owner) < REL_TOL,
                "case {case} owner dof {dof}: {} vs {fd_owner}",
                eval.point[dof]
            );
        }
    }
}

/// Scatter layout: fixed bodies contribute no columns, free bodies three,
/// and the assembled row entries land exactly where the free map says.
#[test]
fn fixed_bodies_are_scattered_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut seen_fixed_host = false;
    let mut seen_fixed_owner = false;
    for _ in 0..200 {
        let mut scene = random_pair_scene(&mut rng);
        let fix_first = rng.gen_bool(0.5);
        scene.bodies[if fix_first { 0 } else { 1 }].fixed = true;
        let system = assemble_with(
            &scene,
            AssembleOptions {
                penetration_allowance: f64::INFINITY,
                corner_rows: true,
            },
        )
        .unwrap();
        assert_eq!(system.ncols(), 3);
        let free = FreeMap::new(&scene);
        assert_eq!(free.free_count(), 1);
        for (k, pair) in system.pairs.iter().enumerate() {
            let row = system.jacobian.row(k);
            assert!(row.len() <= 3, "one fixed body leaves one block");
            if scene.bodies[pair.edge_body].fixed {
                seen_fixed_host = true;
            } else {
                seen_fixed_owner = true;
            }
            for &(c, _) in row {
                assert!(c < 3);
            }
        }
    }
    assert!(seen_fixed_host && seen_fixed_owner);
}
