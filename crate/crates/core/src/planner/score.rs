use nalgebra::Vector3;

use super::gripper::GripperModel;
use super::GraspCandidate;

/// Angle between two vectors, robust near 0 and π.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Quality from the two contact angles (radians between each inward normal
/// and its closing direction) and the opening width.
///
/// Each contact contributes its friction-cone margin
/// `(cos θ − cos α) / (1 − cos α)` with `α = atan(μ)`; the worse contact is
/// kept, clamped to `[0, 1]`, and multiplied by the width factor
/// `1 − width / max_opening` clipped to `[0.25, 1]`.
pub fn quality_from_angles(theta_a: f64, theta_b: f64, width: f64, gripper: &GripperModel) -> f64 {
    let cos_alpha = gripper.cone_half_angle().cos();
    let margin = |theta: f64| (theta.cos() - cos_alpha) / (1.0 - cos_alpha);
    let cone = margin(theta_a).min(margin(theta_b)).clamp(0.0, 1.0);
    let width_factor = (1.0 - width / gripper.max_opening).clamp(0.25, 1.0);
    cone * width_factor
}

/// Contact angles of a candidate: `(θ_a, θ_b)`.
pub fn contact_angles(candidate: &GraspCandidate) -> (f64, f64) {
    let pa = candidate.contact_a.point;
    let pb = candidate.contact_b.point;
    let close_a = pb - pa;
    let close_b = pa - pb;
    (
        angle_between(&-candidate.contact_a.normal, &close_a),
        angle_between(&-candidate.contact_b.normal, &close_b),
    )
}

pub fn score_grasp(candidate: &GraspCandidate, gripper: &GripperModel) -> f64 {
    let (ta, tb) = contact_angles(candidate);
    quality_from_angles(ta, tb, candidate.width, gripper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_antipodal_limit() {
        let g = GripperModel::default();
        assert_eq!(quality_from_angles(0.0, 0.0, 0.0, &g), 1.0);
    }

    #[test]
    fn cone_boundary_is_zero() {
        let g = GripperModel::default();
        let alpha = g.cone_half_angle();
        for tb in [0.0, 0.1, alpha] {
            assert!(quality_from_angles(alpha, tb, 0.01, &g).abs() < 1e-12);
        }
    }

    #[test]
    fn half_margin_half_width() {
        let g = GripperModel::default();
        let ca = g.cone_half_angle().cos();
        let theta = ((1.0 + ca) / 2.0).acos();
        let q = quality_from_angles(theta, theta, g.max_opening / 2.0, &g);
        assert!((q - 0.25).abs() < 1e-12, "{q}");
    }

    #[test]
    fn width_factor_floor() {
        let g = GripperModel::default();
        assert!((quality_from_angles(0.0, 0.0, g.max_opening, &g) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn angle_between_extremes() {
        let x = Vector3::x();
        assert_eq!(angle_between(&x, &x), 0.0);
        assert!((angle_between(&x, &-x) - std::f64::consts::PI).abs() < 1e-15);
    }
}
