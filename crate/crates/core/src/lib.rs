//! Rectification, tie-point extraction and boresight calibration for
//! push-broom (line-scan) imagery.
//!
//! A push-broom sensor captures one spatial row per exposure; the second
//! image dimension is created by platform motion. Platform instability
//! distorts the raw raster: roll shifts lines sideways, pitch and speed
//! variation stretch the image along track. This crate estimates and
//! corrects those distortions from the image content itself, matches
//! overlapping flight lines with a y-scale invariant feature pipeline,
//! and calibrates the camera-to-IMU boresight rotation from the resulting
//! tie points.
//!
//! Pipeline stages, each usable on its own:
//!
//! 1. [`shift`] — per-line-pair horizontal shift estimation, either with a
//!    Gaussian-process MAP model or a cross-correlation baseline.
//! 2. [`rectify`] — accumulate shifts into per-line offsets and resample.
//! 3. [`timesync`] — recover the camera-to-trajectory clock offset by
//!    correlating estimated shifts against the trajectory roll rate.
//! 4. [`features`] — anisotropic-pyramid keypoint detection and matching,
//!    invariant to along-track scale changes.
//! 5. [`filter`] — homography + RANSAC outlier rejection for tie points.
//! 6. [`boresight`] — robust epipolar least squares on SO(3) with
//!    bootstrap uncertainty.
//!
//! The [`synth`] module renders synthetic datasets with known ground truth
//! (shifts, time offsets, boresight, tie points) for testing all stages.

pub mod boresight;
pub mod camera;
pub mod cube;
pub mod error;
pub mod features;
pub mod filter;
pub mod interp;
pub mod rectify;
pub mod rotation;
pub mod shift;
pub mod synth;
pub mod timesync;
pub mod trajectory;

pub use camera::CameraModel;
pub use cube::HyperCube;
pub use error::Error;
pub use rotation::AxisAngle;
pub use trajectory::{PoseSample, Trajectory};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
