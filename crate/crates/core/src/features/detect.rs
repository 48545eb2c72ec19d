//! Determinant-of-Hessian keypoint detector with a binary
//! intensity-comparison descriptor, run per pyramid level.
//!
//! Descriptors are sampled in the level's own coordinate frame, so the
//! anisotropic y-scaling is absorbed by the level rather than the
//! descriptor. No rotation invariance: rectified push-broom chunks are
//! compared in flight-line orientation.

use super::pyramid::PyramidLevel;
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

/// Default detector threshold, relative to the level's maximum response.
pub const DEFAULT_RESPONSE_THRESHOLD: f64 = 0.001;
/// Number of descriptor bits.
pub const DESCRIPTOR_BITS: usize = 512;
/// Radius of the descriptor sampling pattern in level pixels.
const PATTERN_RADIUS: f64 = 16.0;

#[derive(Debug, Clone)]
pub struct Keypoint {
    /// Base-image coordinates (sample, line), sub-pixel.
    pub x: f64,
    pub y: f64,
    pub response: f32,
    /// Scales of the level that produced the keypoint.
    pub x_scale: f64,
    pub y_scale: f64,
    /// 512-bit binary comparison descriptor.
    pub descriptor: [u64; 8],
}

impl Keypoint {
    pub fn hamming(&self, other: &Keypoint) -> u32 {
        self.descriptor
            .iter()
            .zip(&other.descriptor)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// Fixed pseudo-random comparison pattern: pairs of offsets drawn from an
/// isotropic Gaussian, clipped to the pattern radius. Deterministic.
fn pattern() -> &'static [((f32, f32), (f32, f32))] {
    static PATTERN: OnceLock<Vec<((f32, f32), (f32, f32))>> = OnceLock::new();
    PATTERN.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1ab1e);
        let draw = |rng: &mut ChaCha8Rng| loop {
            // Box-Muller; sigma chosen so most samples stay inside the radius.
            let u1: f64 = rng.gen_range(1e-9..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt() * 6.0;
            let (dy, dx) = (r * u2.sin(), r * u2.cos());
            if dx.abs() < PATTERN_RADIUS && dy.abs() < PATTERN_RADIUS {
                return (dx as f32, dy as f32);
            }
        };
        (0..DESCRIPTOR_BITS)
            .map(|_| (draw(&mut rng), draw(&mut rng)))
            .collect()
    })
}

fn bilinear(img: &Array2<f32>, row: f64, col: f64) -> Option<f32> {
    let (h, w) = img.dim();
    if row < 0.0 || col < 0.0 || row > (h - 1) as f64 || col > (w - 1) as f64 {
        return None;
    }
    let r0 = (row.floor() as usize).min(h - 1);
    let c0 = (col.floor() as usize).min(w - 1);
    let r1 = (r0 + 1).min(h - 1);
    let c1 = (c0 + 1).min(w - 1);
    let fr = (row - r0 as f64) as f32;
    let fc = (col - c0 as f64) as f32;
    Some(
        img[(r0, c0)] * (1.0 - fr) * (1.0 - fc)
            + img[(r0, c1)] * (1.0 - fr) * fc
            + img[(r1, c0)] * fr * (1.0 - fc)
            + img[(r1, c1)] * fr * fc,
    )
}

fn hessian_response(img: &Array2<f32>) -> Array2<f32> {
    let (h, w) = img.dim();
    let mut response = Array2::zeros((h, w));
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let lxx = img[(r, c - 1)] - 2.0 * img[(r, c)] + img[(r, c + 1)];
            let lyy = img[(r - 1, c)] - 2.0 * img[(r, c)] + img[(r + 1, c)];
            let lxy = (img[(r + 1, c + 1)] - img[(r + 1, c - 1)] - img[(r - 1, c + 1)]
                + img[(r - 1, c - 1)])
                / 4.0;
            response[(r, c)] = lxx * lyy - lxy * lxy;
        }
    }
    response
}

fn parabolic_offset(prev: f32, center: f32, next: f32) -> f64 {
    let denom = (prev - 2.0 * center + next) as f64;
    if denom.abs() < 1e-12 {
        return 0.0;
    }
    (((prev - next) as f64) / (2.0 * denom)).clamp(-0.5, 0.5)
}

/// Extracts the binary descriptor at a level-frame position, or None when
/// the pattern leaves the image or touches invalid pixels.
fn describe(level: &PyramidLevel, row: f64, col: f64) -> Option<[u64; 8]> {
    let mut descriptor = [0u64; 8];
    for (bit, ((dx1, dy1), (dx2, dy2))) in pattern().iter().enumerate() {
        let (r1, c1) = (row + *dy1 as f64, col + *dx1 as f64);
        let (r2, c2) = (row + *dy2 as f64, col + *dx2 as f64);
        if !sample_valid(level, r1, c1) || !sample_valid(level, r2, c2) {
            return None;
        }
        let a = bilinear(&level.image, r1, c1)?;
        let b = bilinear(&level.image, r2, c2)?;
        if a < b {
            descriptor[bit / 64] |= 1 << (bit % 64);
        }
    }
    Some(descriptor)
}

fn sample_valid(level: &PyramidLevel, row: f64, col: f64) -> bool {
    let (h, w) = level.valid.dim();
    if row < 0.0 || col < 0.0 || row > (h - 1) as f64 || col > (w - 1) as f64 {
        return false;
    }
    let r = row.round() as usize;
    let c = col.round() as usize;
    level.valid[(r.min(h - 1), c.min(w - 1))]
}

/// Detects blob-like keypoints on every level and attaches descriptors.
/// Deterministic: levels in order, row-major scanning, no random steps.
pub fn detect_and_describe(pyramid: &[PyramidLevel]) -> Vec<Keypoint> {
    detect_and_describe_with(pyramid, DEFAULT_RESPONSE_THRESHOLD)
}

pub fn detect_and_describe_with(
    pyramid: &[PyramidLevel],
    relative_threshold: f64,
) -> Vec<Keypoint> {
    let mut keypoints = Vec::new();
    for level in pyramid {
        let response = hessian_response(&level.image);
        let (h, w) = response.dim();
        if h < 3 || w < 3 {
            continue;
        }
        let max_response = response
            .iter()
            .zip(level.valid.iter())
            .filter(|(_, valid)| **valid)
            .map(|(r, _)| *r)
            .fold(0.0f32, f32::max);
        if max_response <= 0.0 {
            continue;
        }
        let threshold = (relative_threshold * max_response as f64) as f32;

        for r in 1..h - 1 {
            for c in 1..w - 1 {
                let v = response[(r, c)];
                if v <= threshold || !level.valid[(r, c)] {
                    continue;
                }
                // 3x3 non-maximum suppression with deterministic tie-breaks.
                let mut is_max = true;
                'nms: for dr in -1isize..=1 {
                    for dc in -1isize..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let n = response[((r as isize + dr) as usize, (c as isize + dc) as usize)];
                        if n > v || (n == v && (dr < 0 || (dr == 0 && dc < 0))) {
                            is_max = false;
                            break 'nms;
                        }
                    }
                }
                if !is_max {
                    continue;
                }
                let dc = parabolic_offset(response[(r, c - 1)], v, response[(r, c + 1)]);
                let dr = parabolic_offset(response[(r - 1, c)], v, response[(r + 1, c)]);
                let (row, col) = (r as f64 + dr, c as f64 + dc);
                let Some(descriptor) = describe(level, row, col) else {
                    continue;
                };
                keypoints.push(Keypoint {
                    x: (col + 0.5) * level.x_scale - 0.5,
                    y: (row + 0.5) * level.y_scale - 0.5,
                    response: v,
                    x_scale: level.x_scale,
                    y_scale: level.y_scale,
                    descriptor,
                });
            }
        }
    }
    keypoints
}
