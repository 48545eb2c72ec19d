//! Axis-angle rotations and SO(3) helpers.
//!
//! Rotations are parameterized as axis-angle vectors (elements of so(3)):
//! the direction is the rotation axis, the norm the angle in radians.
//! [`AxisAngle`] keeps the norm in `[0, pi]` so equality tests and angle
//! deviations are well defined.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Below this squared angle, Rodrigues coefficients use Taylor expansions.
const TAYLOR_EPS_SQ: f64 = 1e-16;

/// Canonical axis-angle rotation, norm in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle(Vec3);

impl AxisAngle {
    /// Wraps the angle into `[0, pi]`, flipping the axis if needed.
    pub fn new(v: Vec3) -> Self {
        let theta = v.norm();
        if theta <= PI {
            return Self(v);
        }
        let wrapped = theta.rem_euclid(2.0 * PI);
        let canonical = if wrapped > PI {
            wrapped - 2.0 * PI
        } else {
            wrapped
        };
        Self(v * (canonical / theta))
    }

    pub fn from_components(rx: f64, ry: f64, rz: f64) -> Self {
        Self::new(Vec3::new(rx, ry, rz))
    }

    pub fn zero() -> Self {
        Self(Vec3::zeros())
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// Rotation angle in radians, in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    /// The rotation matrix `exp([r]x)`.
    pub fn matrix(&self) -> Mat3 {
        exp_map(self)
    }
}

/// Cross-product matrix `[v]x` such that `skew(v) * w == v.cross(w)`.
#[rustfmt::skip]
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(
         0.0, -v.z,  v.y,
         v.z,  0.0, -v.x,
        -v.y,  v.x,  0.0,
    )
}

/// Exponential map so(3) -> SO(3) in Rodrigues form.
pub fn exp_map(r: &AxisAngle) -> Mat3 {
    let v = r.vector();
    let theta_sq = v.norm_squared();
    let (a, b) = if theta_sq < TAYLOR_EPS_SQ {
        (1.0 - theta_sq / 6.0, 0.5 - theta_sq / 24.0)
    } else {
        let theta = theta_sq.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    };
    let k = skew(&v);
    Mat3::identity() + k * a + k * k * b
}

/// Logarithm map SO(3) -> so(3), inverse of [`exp_map`].
///
/// Works through the whole angle range, including rotations at and near
/// pi where the skew part vanishes (nadir-looking attitudes in an ENU
/// world live exactly there).
pub fn log_map(m: &Mat3) -> AxisAngle {
    let skew_part = Vec3::new(
        (m[(2, 1)] - m[(1, 2)]) / 2.0,
        (m[(0, 2)] - m[(2, 0)]) / 2.0,
        (m[(1, 0)] - m[(0, 1)]) / 2.0,
    );
    let sin_theta = skew_part.norm();
    let cos_theta = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let theta = sin_theta.atan2(cos_theta);

    if theta < 1e-9 {
        return AxisAngle::new(skew_part);
    }
    if PI - theta > 1e-4 {
        return AxisAngle::new(skew_part * (theta / sin_theta));
    }

    // Near pi the axis comes from the symmetric part: R ~ 2 a a^T - I.
    let one_minus_cos = 1.0 - cos_theta;
    let mut axis = Vec3::zeros();
    let k = (0..3)
        .max_by(|&a, &b| m[(a, a)].partial_cmp(&m[(b, b)]).expect("finite diagonal"))
        .expect("non-empty");
    axis[k] = ((m[(k, k)] - cos_theta) / one_minus_cos).max(0.0).sqrt();
    for i in 0..3 {
        if i != k {
            axis[i] = (m[(i, k)] + m[(k, i)]) / (2.0 * one_minus_cos * axis[k]);
        }
    }
    axis.normalize_mut();
    // Sign is ambiguous at exactly pi; align with the skew part when it
    // still carries direction.
    if sin_theta > 1e-12 && axis.dot(&skew_part) < 0.0 {
        axis = -axis;
    }
    AxisAngle::new(axis * theta)
}

/// Angle in `[0, pi]` between the rotations `exp([r1]x)` and `exp([r2]x)`:
/// `arccos((tr(exp(-[r1]x) exp([r2]x)) - 1) / 2)` with the cosine clamped
/// to `[-1, 1]`, evaluated through `atan2` of the relative rotation's skew
/// and trace parts so tiny angles do not drown in the arccos rounding
/// floor.
pub fn angle_deviation(r1: &AxisAngle, r2: &AxisAngle) -> f64 {
    let rel = exp_map(r1).transpose() * exp_map(r2);
    let cos = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew_part = Vec3::new(
        (rel[(2, 1)] - rel[(1, 2)]) / 2.0,
        (rel[(0, 2)] - rel[(2, 0)]) / 2.0,
        (rel[(1, 0)] - rel[(0, 1)]) / 2.0,
    );
    skew_part.norm().atan2(cos)
}

/// Right Jacobian of the exponential map: `exp(r + d) ~ exp(r) exp(Jr(r) d)`.
pub fn right_jacobian(v: &Vec3) -> Mat3 {
    let theta_sq = v.norm_squared();
    let k = skew(v);
    if theta_sq < TAYLOR_EPS_SQ {
        return Mat3::identity() - k * 0.5 + k * k * (1.0 / 6.0);
    }
    let theta = theta_sq.sqrt();
    let a = (1.0 - theta.cos()) / theta_sq;
    let b = (theta - theta.sin()) / (theta_sq * theta);
    Mat3::identity() - k * a + k * k * b
}

/// Chordal mean: the rotation closest in Frobenius norm to the elementwise
/// average of the inputs, via projection onto SO(3).
pub fn chordal_mean(rotations: &[Mat3]) -> Mat3 {
    assert!(!rotations.is_empty(), "chordal mean of empty set");
    let mut sum = Mat3::zeros();
    for r in rotations {
        sum += r;
    }
    project_so3(&(sum / rotations.len() as f64))
}

/// Orthogonal polar factor of `m` with determinant +1.
pub fn project_so3(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("3x3 svd");
    let v_t = svd.v_t.expect("3x3 svd");
    let det = (u * v_t).determinant();
    let fix = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, det.signum()));
    u * fix * v_t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_axis_angle(rng: &mut ChaCha8Rng, max_angle: f64) -> AxisAngle {
        use rand::Rng as _;
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n < 1e-12 {
            return AxisAngle::zero();
        }
        AxisAngle::new(v / n * rng.gen_range(0.0..max_angle))
    }

    #[test]
    fn exp_map_identity() {
        assert_relative_eq!(
            exp_map(&AxisAngle::zero()),
            Mat3::identity(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn exp_map_quarter_turn_about_z() {
        let r = AxisAngle::from_components(0.0, 0.0, PI / 2.0);
        let m = exp_map(&r);
        let rotated = m * Vec3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(rotated, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn exp_map_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = random_axis_angle(&mut rng, PI);
            let neg = AxisAngle::new(-r.vector());
            let prod = exp_map(&r) * exp_map(&neg);
            assert_relative_eq!(prod, Mat3::identity(), epsilon = 1e-12);
        }
    }

    #[test]
    fn exp_map_orthogonal_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = random_axis_angle(&mut rng, PI);
            let m = exp_map(&r);
            assert_relative_eq!(m.transpose() * m, Mat3::identity(), epsilon = 1e-10);
            assert_relative_eq!(m.determinant(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn log_exp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let r = random_axis_angle(&mut rng, PI - 1e-3);
            let back = log_map(&exp_map(&r));
            assert_relative_eq!(back.vector(), r.vector(), epsilon = 1e-8);
        }
    }

    #[test]
    fn log_map_handles_half_turns() {
        use rand::Rng as _;
        // Exactly pi about coordinate and skew axes: the skew part of the
        // matrix vanishes, so these exercise the symmetric-part branch.
        let axes = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 0.0).normalize(),
            Vec3::new(-0.3, 0.5, 0.9).normalize(),
        ];
        for axis in axes {
            let r = AxisAngle::new(axis * PI);
            let m = exp_map(&r);
            let back = exp_map(&log_map(&m));
            assert_relative_eq!(back, m, epsilon = 1e-9);
        }
        // And a sweep through the near-pi neighborhood.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let axis = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if axis.norm() < 1e-3 {
                continue;
            }
            let near_pi = AxisAngle::new(axis.normalize() * rng.gen_range((PI - 1e-3)..PI));
            let m = exp_map(&near_pi);
            let back = exp_map(&log_map(&m));
            assert_relative_eq!(back, m, epsilon = 1e-9);
        }
    }

    #[test]
    fn angle_deviation_identical_is_zero() {
        let r = AxisAngle::from_components(0.3, -0.2, 0.9);
        assert!(angle_deviation(&r, &r) < 1e-12);
    }

    #[test]
    fn angle_deviation_single_axis() {
        for theta in [0.1, 0.5, 1.0, 2.0, PI] {
            let r1 = AxisAngle::zero();
            let r2 = AxisAngle::from_components(0.0, 0.0, theta);
            assert_relative_eq!(angle_deviation(&r1, &r2), theta, epsilon = 1e-9);
        }
    }

    #[test]
    fn angle_deviation_matches_quaternion_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let r1 = random_axis_angle(&mut rng, PI - 1e-2);
            let r2 = random_axis_angle(&mut rng, PI - 1e-2);
            let q1 = UnitQuaternion::from_scaled_axis(r1.vector());
            let q2 = UnitQuaternion::from_scaled_axis(r2.vector());
            let expected = q1.angle_to(&q2);
            assert_relative_eq!(angle_deviation(&r1, &r2), expected, epsilon = 1e-7);
        }
    }

    #[test]
    fn right_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = 1e-6;
        for _ in 0..100 {
            let r = random_axis_angle(&mut rng, 2.0);
            let v = r.vector();
            let jr = right_jacobian(&v);
            let base = exp_map(&r);
            for k in 0..3 {
                let mut dv = Vec3::zeros();
                dv[k] = h;
                let plus = exp_map(&AxisAngle::new(v + dv));
                let minus = exp_map(&AxisAngle::new(v - dv));
                // d exp(r)/dr_k = exp(r) [Jr e_k]x
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = base * skew(&jr.column(k).into());
                assert_relative_eq!(numeric, analytic, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn chordal_mean_of_identical_rotations() {
        let r = exp_map(&AxisAngle::from_components(0.2, 0.1, -0.4));
        let mean = chordal_mean(&[r, r, r]);
        assert_relative_eq!(mean, r, epsilon = 1e-12);
    }

    #[test]
    fn chordal_mean_symmetric_pair_lies_between() {
        let a = AxisAngle::from_components(0.0, 0.0, 0.2);
        let b = AxisAngle::from_components(0.0, 0.0, -0.2);
        let mean = chordal_mean(&[exp_map(&a), exp_map(&b)]);
        assert_relative_eq!(mean, Mat3::identity(), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn canonicalization_bounds_angle(rx in -20.0..20.0f64, ry in -20.0..20.0f64, rz in -20.0..20.0f64) {
            let r = AxisAngle::from_components(rx, ry, rz);
            prop_assert!(r.angle() <= PI + 1e-12);
            // Same rotation as the raw vector.
            let raw = AxisAngle(Vec3::new(rx, ry, rz));
            let dev = angle_deviation(&r, &raw);
            prop_assert!(dev < 1e-6, "wrap changed the rotation by {dev}");
        }

        #[test]
        fn angle_deviation_symmetric_nonneg_triangle(
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_axis_angle(&mut rng, PI);
            let b = random_axis_angle(&mut rng, PI);
            let c = random_axis_angle(&mut rng, PI);
            let ab = angle_deviation(&a, &b);
            let ba = angle_deviation(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ab >= 0.0);
            let ac = angle_deviation(&a, &c);
            let cb = angle_deviation(&c, &b);
            prop_assert!(ab <= ac + cb + 1e-9);
        }
    }
}
