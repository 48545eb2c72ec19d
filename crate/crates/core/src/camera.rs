//! Line-scan camera model.
//!
//! The sensor is a single row of `samples_per_line` pixels. The camera
//! frame has x along the sample axis (cross-track), z along the viewing
//! direction, y completing the right-handed frame (against the flight
//! direction for the standard mount).

use crate::error::Error;
use crate::rotation::Vec3;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    focal_length_px: f64,
    samples_per_line: usize,
    principal_sample: f64,
}

impl CameraModel {
    pub fn new(focal_length_px: f64, samples_per_line: usize, principal_sample: f64) -> Result<Self> {
        if !(focal_length_px > 0.0) || !focal_length_px.is_finite() {
            return Err(Error::InvalidInput(format!(
                "focal length must be positive, got {focal_length_px}"
            )));
        }
        if !(0.0..samples_per_line as f64).contains(&principal_sample) {
            return Err(Error::InvalidInput(format!(
                "principal sample {principal_sample} outside [0, {samples_per_line})"
            )));
        }
        Ok(Self {
            focal_length_px,
            samples_per_line,
            principal_sample,
        })
    }

    /// Model with the principal point at the line center.
    pub fn centered(focal_length_px: f64, samples_per_line: usize) -> Result<Self> {
        let principal = (samples_per_line as f64 - 1.0) / 2.0;
        Self::new(focal_length_px, samples_per_line, principal)
    }

    pub fn focal_length_px(&self) -> f64 {
        self.focal_length_px
    }

    pub fn samples_per_line(&self) -> usize {
        self.samples_per_line
    }

    pub fn principal_sample(&self) -> f64 {
        self.principal_sample
    }

    /// Ground-projected pixels per radian of rotation at a pixel position
    /// `x_from_center` (pixels from the principal sample):
    /// `f / cos^2(atan(x/f))`. Minimal (`= f`) at the optical center.
    pub fn pixels_per_radian(&self, x_from_center: f64) -> f64 {
        let c = (x_from_center / self.focal_length_px).atan().cos();
        self.focal_length_px / (c * c)
    }

    /// Relative shift error at a pixel position with respect to a shift at
    /// the optical center: `1/cos^2(atan(x/f)) - 1`. Even in `x`, zero at
    /// the center, strictly increasing in `|x|`.
    pub fn relative_shift_error(&self, x_from_center: f64) -> f64 {
        let t = x_from_center / self.focal_length_px;
        // 1/cos^2(atan(t)) - 1 == tan^2(atan(t)) == t^2
        t * t
    }

    /// Viewing ray in the camera frame for an absolute sample coordinate,
    /// unit length: `normalize(((x - principal)/f, 0, 1))`.
    pub fn ray(&self, sample: f64) -> Vec3 {
        Vec3::new(
            (sample - self.principal_sample) / self.focal_length_px,
            0.0,
            1.0,
        )
        .normalize()
    }

    /// Sample coordinate that observes a camera-frame direction (inverse of
    /// [`CameraModel::ray`] for directions with positive z).
    pub fn sample_for_ray(&self, v: &Vec3) -> f64 {
        self.principal_sample + self.focal_length_px * v.x / v.z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pixels_per_radian_at_center_is_focal() {
        let cam = CameraModel::centered(1345.0, 900).unwrap();
        assert_relative_eq!(cam.pixels_per_radian(0.0), 1345.0);
    }

    #[test]
    fn relative_error_at_half_fov_edge() {
        // 36.5 degree field of view: the edge pixel sits at f*tan(18.25 deg).
        let cam = CameraModel::centered(1345.0, 900).unwrap();
        let x_edge = 1345.0 * 18.25f64.to_radians().tan();
        assert_relative_eq!(cam.relative_shift_error(x_edge), 0.109, epsilon = 5e-4);
        assert_relative_eq!(
            cam.pixels_per_radian(x_edge) / cam.focal_length_px() - 1.0,
            0.109,
            epsilon = 5e-4
        );
    }

    #[test]
    fn mean_relative_error_across_line() {
        // 900 samples spanning the 36.5 degree field of view.
        let cam = CameraModel::centered(1345.0, 900).unwrap();
        let x_edge = 1345.0 * 18.25f64.to_radians().tan();
        let n = 900;
        let mean: f64 = (0..n)
            .map(|i| {
                let x = x_edge * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
                cam.relative_shift_error(x)
            })
            .sum::<f64>()
            / n as f64;
        assert_relative_eq!(mean, 0.036, epsilon = 1.5e-3);
    }

    #[test]
    fn relative_error_at_focal_distance() {
        let cam = CameraModel::centered(1345.0, 4000).unwrap();
        assert_relative_eq!(cam.relative_shift_error(1345.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_at_principal_is_boresight() {
        let cam = CameraModel::centered(1345.0, 900).unwrap();
        let v = cam.ray(cam.principal_sample());
        assert_relative_eq!(v, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn ray_forty_five_degrees_off_axis() {
        let cam = CameraModel::centered(1345.0, 4000).unwrap();
        let v = cam.ray(cam.principal_sample() + 1345.0);
        assert_relative_eq!(v.x / v.z, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_sample_round_trip() {
        let cam = CameraModel::new(1345.0, 900, 420.0).unwrap();
        for s in [0.0, 13.5, 420.0, 899.0] {
            let v = cam.ray(s);
            assert_relative_eq!(cam.sample_for_ray(&v), s, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(CameraModel::new(0.0, 900, 450.0).is_err());
        assert!(CameraModel::new(-1.0, 900, 450.0).is_err());
        assert!(CameraModel::new(1345.0, 900, 900.0).is_err());
    }

    proptest! {
        #[test]
        fn relative_error_even_and_monotone(x in 1.0..800.0f64, dx in 1.0..100.0f64) {
            let cam = CameraModel::centered(1345.0, 1800).unwrap();
            prop_assert!((cam.relative_shift_error(x) - cam.relative_shift_error(-x)).abs() < 1e-12);
            prop_assert!(cam.relative_shift_error(x + dx) > cam.relative_shift_error(x));
            prop_assert!(cam.pixels_per_radian(x) >= cam.focal_length_px());
        }
    }
}
