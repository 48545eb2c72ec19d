//! Anisotropic blur pyramid.
//!
//! Unlike an ordinary scale pyramid, the x and y scales are explored
//! independently so that keypoints detected on a level with y-scale `s`
//! match keypoints of an image stretched by `s` along track. In aerial
//! line scanning the x (cross-track) scale barely changes, so a single x
//! level is the default.

use crate::error::Error;
use crate::Result;
use ndarray::Array2;

/// Base smoothing applied at unit scale.
const BASE_SIGMA: f64 = 0.8;
/// Anti-alias blur constant per unit of downsampling.
const ANTIALIAS_SIGMA: f64 = 0.6;
/// Levels whose height or width would drop below this are truncated.
const MIN_LEVEL_DIM: usize = 32;
/// Maximum tolerated contribution of invalid (filled) pixels.
const INVALID_INFLUENCE: f32 = 0.02;

#[derive(Debug, Clone)]
pub struct PyramidLevel {
    pub image: Array2<f32>,
    pub valid: Array2<bool>,
    pub x_scale: f64,
    pub y_scale: f64,
    /// Per-axis Gaussian blur applied to the base image, pixels.
    pub blur_sigma: (f64, f64),
}

/// Total base-image blur that leaves an effective smoothing of
/// `BASE_SIGMA` in a grid downsampled by `s`.
fn level_sigma(s: f64) -> f64 {
    (ANTIALIAS_SIGMA * ANTIALIAS_SIGMA * (s * s - 1.0) + s * s * BASE_SIGMA * BASE_SIGMA).sqrt()
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    if sigma <= 1e-6 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f32> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp() as f32)
        .collect();
    let sum: f32 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with replicated edges.
pub(crate) fn gaussian_blur(img: &Array2<f32>, sigma_x: f64, sigma_y: f64) -> Array2<f32> {
    let (h, w) = img.dim();
    let kx = gaussian_kernel(sigma_x);
    let ky = gaussian_kernel(sigma_y);
    let rx = (kx.len() / 2) as isize;
    let ry = (ky.len() / 2) as isize;

    let mut tmp = Array2::zeros((h, w));
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0f32;
            for (i, kv) in kx.iter().enumerate() {
                let cc = (c as isize + i as isize - rx).clamp(0, w as isize - 1) as usize;
                acc += kv * img[(r, cc)];
            }
            tmp[(r, c)] = acc;
        }
    }
    let mut out = Array2::zeros((h, w));
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0f32;
            for (i, kv) in ky.iter().enumerate() {
                let rr = (r as isize + i as isize - ry).clamp(0, h as isize - 1) as usize;
                acc += kv * tmp[(rr, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

fn bilinear(img: &Array2<f32>, row: f64, col: f64) -> f32 {
    let (h, w) = img.dim();
    let r = row.clamp(0.0, (h - 1) as f64);
    let c = col.clamp(0.0, (w - 1) as f64);
    let r0 = (r.floor() as usize).min(h - 1);
    let c0 = (c.floor() as usize).min(w - 1);
    let r1 = (r0 + 1).min(h - 1);
    let c1 = (c0 + 1).min(w - 1);
    let fr = (r - r0 as f64) as f32;
    let fc = (c - c0 as f64) as f32;
    img[(r0, c0)] * (1.0 - fr) * (1.0 - fc)
        + img[(r0, c1)] * (1.0 - fr) * fc
        + img[(r1, c0)] * fr * (1.0 - fc)
        + img[(r1, c1)] * fr * fc
}

/// Blur + downsample with explicit per-axis blur sigmas.
fn resample_with_blur(
    img: &Array2<f32>,
    invalid: &Array2<f32>,
    sx: f64,
    sy: f64,
    sigma_x: f64,
    sigma_y: f64,
) -> (Array2<f32>, Array2<f32>) {
    let (h, w) = img.dim();
    let blurred = gaussian_blur(img, sigma_x, sigma_y);
    let blurred_invalid = gaussian_blur(invalid, sigma_x, sigma_y);

    let oh = ((h as f64 / sy).round() as usize).max(1);
    let ow = ((w as f64 / sx).round() as usize).max(1);
    let mut out = Array2::zeros((oh, ow));
    let mut out_invalid = Array2::zeros((oh, ow));
    for r in 0..oh {
        for c in 0..ow {
            let src_r = (r as f64 + 0.5) * sy - 0.5;
            let src_c = (c as f64 + 0.5) * sx - 0.5;
            out[(r, c)] = bilinear(&blurred, src_r, src_c);
            out_invalid[(r, c)] = bilinear(&blurred_invalid, src_r, src_c);
        }
    }
    (out, out_invalid)
}

/// Anti-aliased anisotropic resampling by independent per-axis factors.
/// Output pixel `o` reads input position `(o + 0.5) * s - 0.5`
/// (center-aligned convention). This is the plain squash operator: a
/// pyramid level at scale `s` equals this resampling followed by the
/// base smoothing, which is what makes levels comparable with
/// pre-stretched imagery.
pub fn resample_anisotropic(
    img: &Array2<f32>,
    invalid: &Array2<f32>,
    sx: f64,
    sy: f64,
) -> (Array2<f32>, Array2<f32>) {
    let aa = |s: f64| ANTIALIAS_SIGMA * (s * s - 1.0).max(0.0).sqrt();
    resample_with_blur(img, invalid, sx, sy, aa(sx), aa(sy))
}

/// Builds the anisotropic pyramid. Levels are ordered y-major with scales
/// `(ratio^i, ratio^j)` for `i < x_octaves`, `j < y_octaves`; levels whose
/// resampled size would fall below 32 px are dropped. NaN pixels are
/// treated as invalid: they are filled with the valid mean before
/// blurring and excluded through the per-level validity mask.
pub fn build_anisotropic_pyramid(
    image: &Array2<f32>,
    y_octaves: usize,
    x_octaves: usize,
    ratio: f64,
) -> Result<Vec<PyramidLevel>> {
    let (h, w) = image.dim();
    if h < 64 || w < 64 {
        return Err(Error::InvalidInput(format!(
            "image {h}x{w} too small, need at least 64x64"
        )));
    }
    if y_octaves == 0 || !(1..=2).contains(&x_octaves) {
        return Err(Error::InvalidInput(
            "y_octaves must be >= 1 and x_octaves in 1..=2".into(),
        ));
    }
    if !(ratio > 1.0) {
        return Err(Error::InvalidInput("pyramid ratio must exceed 1".into()));
    }

    // Fill invalid pixels with the valid mean and remember where they were.
    let mut invalid = Array2::zeros((h, w));
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for v in image.iter() {
        if v.is_finite() {
            sum += *v as f64;
            count += 1;
        }
    }
    let fill = if count > 0 { (sum / count as f64) as f32 } else { 0.0 };
    let mut filled = image.clone();
    for (f, m) in filled.iter_mut().zip(invalid.iter_mut()) {
        if !f.is_finite() {
            *f = fill;
            *m = 1.0;
        }
    }

    let mut levels = Vec::new();
    for j in 0..y_octaves {
        for i in 0..x_octaves {
            let sx = ratio.powi(i as i32);
            let sy = ratio.powi(j as i32);
            if (h as f64 / sy) < MIN_LEVEL_DIM as f64 || (w as f64 / sx) < MIN_LEVEL_DIM as f64 {
                continue;
            }
            let (img, inv) =
                resample_with_blur(&filled, &invalid, sx, sy, level_sigma(sx), level_sigma(sy));
            let valid = inv.mapv(|v| v <= INVALID_INFLUENCE);
            levels.push(PyramidLevel {
                image: img,
                valid,
                x_scale: sx,
                y_scale: sy,
                blur_sigma: (level_sigma(sx), level_sigma(sy)),
            });
        }
    }
    Ok(levels)
}
