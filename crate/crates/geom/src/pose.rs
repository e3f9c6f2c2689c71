use crate::{Mat3, Vec3};
use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

/// Z-Y-X Euler angles in degrees, applied as `Rz(alpha) * Ry(beta) * Rx(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerZyx {
    #[serde(rename = "alpha_z_deg", default)]
    pub alpha: f64,
    #[serde(rename = "beta_y_deg", default)]
    pub beta: f64,
    #[serde(rename = "gamma_x_deg", default)]
    pub gamma: f64,
}

impl EulerZyx {
    pub const ZERO: EulerZyx = EulerZyx { alpha: 0.0, beta: 0.0, gamma: 0.0 };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerZyx { alpha, beta, gamma }
    }

    pub fn matrix(&self) -> Mat3 {
        euler_to_matrix(*self)
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }
}

pub fn rot_x(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn euler_to_matrix(e: EulerZyx) -> Mat3 {
    rot_z(e.alpha) * rot_y(e.beta) * rot_x(e.gamma)
}

/// Inverse of [`euler_to_matrix`]; beta is returned in [-90, 90].
/// At gimbal lock gamma is folded into alpha.
pub fn matrix_to_euler(r: &Mat3) -> EulerZyx {
    let sb = (-r[(2, 0)]).clamp(-1.0, 1.0);
    let beta = sb.asin();
    if sb.abs() < 1.0 - 1e-12 {
        let alpha = r[(1, 0)].atan2(r[(0, 0)]);
        let gamma = r[(2, 1)].atan2(r[(2, 2)]);
        EulerZyx::new(alpha.to_degrees(), beta.to_degrees(), gamma.to_degrees())
    } else {
        let alpha = (-r[(0, 1)]).atan2(r[(1, 1)]);
        EulerZyx::new(alpha.to_degrees(), beta.to_degrees(), 0.0)
    }
}

/// Rigid transform: `x -> R x + t`, translation in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose6D {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for Pose6D {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose6D {
    pub fn identity() -> Self {
        Pose6D { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn new(translation: Vec3, euler: EulerZyx) -> Self {
        Pose6D { rotation: euler.matrix(), translation }
    }

    pub fn from_parts(translation: Vec3, rotation: Mat3) -> Self {
        Pose6D { rotation, translation }
    }

    pub fn translation_only(t: Vec3) -> Self {
        Pose6D { rotation: Mat3::identity(), translation: t }
    }

    pub fn euler(&self) -> EulerZyx {
        matrix_to_euler(&self.rotation)
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &Pose6D) -> Pose6D {
        Pose6D {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose6D {
        let rt = self.rotation.transpose();
        Pose6D { rotation: rt, translation: -(rt * self.translation) }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Re-orthonormalize a rotation that drifted through long compositions.
    pub fn renormalized(&self) -> Pose6D {
        let r = Rotation3::from_matrix_eps(&self.rotation, 1e-12, 50, Rotation3::identity());
        Pose6D { rotation: *r.matrix(), translation: self.translation }
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.iter().all(|v| v.is_finite()) && self.translation.iter().all(|v| v.is_finite())
    }

    pub fn approx_eq(&self, other: &Pose6D, tol: f64) -> bool {
        (self.rotation - other.rotation).amax() <= tol
            && (self.translation - other.translation).amax() <= tol
    }
}

/// Largest deviation of `r` from an orthonormal, right-handed matrix.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    let e = (r.transpose() * r - Mat3::identity()).amax();
    e.max((r.determinant() - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_axis_matrices() {
        let r = euler_to_matrix(EulerZyx::new(90.0, 0.0, 0.0));
        assert_relative_eq!(r * Vec3::x(), Vec3::y(), epsilon = 1e-12);
        let r = euler_to_matrix(EulerZyx::new(0.0, 90.0, 0.0));
        assert_relative_eq!(r * Vec3::z(), Vec3::x(), epsilon = 1e-12);
        let r = euler_to_matrix(EulerZyx::new(0.0, 0.0, 90.0));
        assert_relative_eq!(r * Vec3::y(), Vec3::z(), epsilon = 1e-12);
    }

    #[test]
    fn zyx_order_matches_nalgebra() {
        // nalgebra's from_euler_angles(roll, pitch, yaw) is Rz*Ry*Rx too
        let e = EulerZyx::new(170.0, 5.0, 45.0);
        let na = Rotation3::from_euler_angles(
            e.gamma.to_radians(),
            e.beta.to_radians(),
            e.alpha.to_radians(),
        );
        assert_relative_eq!(euler_to_matrix(e), *na.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn euler_round_trip() {
        let e = EulerZyx::new(-33.0, 12.5, 71.0);
        let back = matrix_to_euler(&e.matrix());
        assert_relative_eq!(back.alpha, e.alpha, epsilon = 1e-9);
        assert_relative_eq!(back.beta, e.beta, epsilon = 1e-9);
        assert_relative_eq!(back.gamma, e.gamma, epsilon = 1e-9);
    }

    #[test]
    fn gimbal_lock_round_trip_matrix() {
        let e = EulerZyx::new(30.0, 90.0, 10.0);
        let back = matrix_to_euler(&e.matrix());
        assert_relative_eq!(back.matrix(), e.matrix(), epsilon = 1e-9);
    }

    #[test]
    fn compose_then_inverse_is_identity() {
        let a = Pose6D::new(Vec3::new(1.0, -2.0, 3.0), EulerZyx::new(10.0, 20.0, 30.0));
        let id = a.compose(&a.inverse());
        assert!(id.approx_eq(&Pose6D::identity(), 1e-12));
    }
}
