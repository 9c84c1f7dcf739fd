//! The single distance kernel every constraint row is built from.
//!
//! A host body rigidly carries an oriented line (anchor point plus unit
//! normal, both in its local frame); another body carries a point. The row
//! value is the signed distance of the world-space point from the
//! world-space line, positive on the normal side. Edge rows, averaged
//! corner rows, and view-cone rows all instantiate this with different
//! anchors and normals, so one pair of value/gradient functions covers the
//! whole system.

use crate::geometry::Pose;
use crate::vec2::Vec2;

/// An oriented line fixed in a host body's frame.
#[derive(Clone, Copy, Debug)]
pub struct HalfPlane {
    pub anchor: Vec2,
    /// Unit length; callers normalize before constructing.
    pub normal: Vec2,
}

/// Row value and its derivatives with respect to the six pose coordinates.
/// Layout of each triple: [d/dx, d/dy, d/dtheta].
#[derive(Clone, Copy, Debug)]
pub struct RowEval {
    pub value: f64,
    pub host: [f64; 3],
    pub point: [f64; 3],
}

/// Evaluate d = n_w . (p_w - o_w) and its exact gradient, where
/// n_w = R(th1) normal, o_w = t1 + R(th1) anchor, p_w = t2 + R(th2) point.
///
/// Differentiating the rotations gives quarter-turn vectors, and the host
/// angle terms from the rotating normal and the rotating anchor combine
/// into a single cross product taken about the host origin:
///   d/dt1     = -n_w
///   d/dth1    = n_w x (p_w - t1)
///   d/dt2     = n_w
///   d/dth2    = -(n_w x (p_w - t2))
pub fn eval_half_plane(host: &Pose, plane: &HalfPlane, owner: &Pose, point: Vec2) -> RowEval {
    let n = plane.normal.rotated(host.theta);
    let o = host.translation() + plane.anchor.rotated(host.theta);
    let p = owner.translation() + point.rotated(owner.theta);
    RowEval {
        value: n.dot(p - o),
        host: [-n.x, -n.y, n.cross(p - host.translation())],
        point: [n.x, n.y, -n.cross(p - owner.translation())],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(host: Pose, plane: HalfPlane, owner: Pose, point: Vec2) {
        let h = 1e-6;
        let eval = eval_half_plane(&host, &plane, &owner, point);
        let value = |hp: Pose, op: Pose| eval_half_plane(&hp, &plane, &op, point).value;
        let host_fd = [
            (value(Pose::new(host.x + h, host.y, host.theta), owner)
                - value(Pose::new(host.x - h, host.y, host.theta), owner))
                / (2.0 * h),
            (value(Pose::new(host.x, host.y + h, host.theta), owner)
                - value(Pose::new(host.x, host.y - h, host.theta), owner))
                / (2.0 * h),
            (value(Pose::new(host.x, host.y, host.theta + h), owner)
                - value(Pose::new(host.x, host.y, host.theta - h), owner))
                / (2.0 * h),
        ];
        let owner_fd = [
            (value(host, Pose::new(owner.x + h, owner.y, owner.theta))
                - value(host, Pose::new(owner.x - h, owner.y, owner.theta)))
                / (2.0 * h),
            (value(host, Pose::new(owner.x, owner.y + h, owner.theta))
                - value(host, Pose::new(owner.x, owner.y - h, owner.theta)))
                / (2.0 * h),
            (value(host, Pose::new(owner.x, owner.y, owner.theta + h))
                - value(host, Pose::new(owner.x, owner.y, owner.theta - h)))
                / (2.0 * h),
        ];
        for k in 0..3 {
            assert!(
                (eval.host[k] - host_fd[k]).abs() < 1e-8,
                "host dof {k}: analytic {} vs fd {}",
                eval.host[k],
                host_fd[k]
            );
            assert!(
                (eval.point[k] - owner_fd[k]).abs() < 1e-8,
                "owner dof {k}: analytic {} vs fd {}",
                eval.point[k],
                owner_fd[k]
            );
        }
    }

    #[test]
    fn axis_aligned_case_by_hand() {
        // Host at identity, plane x = 1 facing +x, point at (2, 1).
        let plane = HalfPlane {
            anchor: Vec2::new(1.0, 0.0),
            normal: Vec2::new(1.0, 0.0),
        };
        let eval = eval_half_plane(
            &Pose::IDENTITY,
            &plane,
            &Pose::IDENTITY,
            Vec2::new(2.0, 1.0),
        );
        assert!((eval.value - 1.0).abs() < 1e-15);
        assert_eq!(eval.host[0], -1.0);
        assert_eq!(eval.host[1], 0.0);
        // Rotating the host about its origin sweeps the plane under the
        // point: d/dth = n x p = 1*1 - 0*2 = 1.
        assert!((eval.host[2] - 1.0).abs() < 1e-15);
        assert_eq!(eval.point[0], 1.0);
        // Rotating the owner about its origin moves the point sideways at
        // radius 2,1: d/dth = -(n x (p - t2)) = -(1*1 - 0*2) = -1.
        assert!((eval.point[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences_in_general_position() {
        fd_check(
            Pose::new(0.4, -1.2, 0.9),
            HalfPlane {
                anchor: Vec2::new(0.7, 0.3),
                normal: Vec2::new(0.6, 0.8),
            },
            Pose::new(-2.0, 0.5, -2.4),
            Vec2::new(-0.3, 1.1),
        );
        fd_check(
            Pose::new(3.0, 2.0, -0.3),
            HalfPlane {
                anchor: Vec2::new(-1.0, 0.0),
                normal: Vec2::new(0.0, -1.0),
            },
            Pose::new(0.0, 0.0, 1.7),
            Vec2::new(2.0, -0.5),
        );
    }
}
