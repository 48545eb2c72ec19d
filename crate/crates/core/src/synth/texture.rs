//! Scene texture generators for the synthetic push-broom renderer.

use crate::cube::HyperCube;
use crate::error::Error;
use crate::shift::{KernelKind, KernelParams};
use crate::Result;
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::path::PathBuf;

/// Flat-terrain radiance texture sampled by the renderer.
#[derive(Debug, Clone)]
pub struct SceneTexture {
    /// Height x width radiance raster (arbitrary units).
    pub raster: Array2<f64>,
    /// Ground sample distance, meters per pixel.
    pub gsd: f64,
}

#[derive(Debug, Clone)]
pub enum TextureKind {
    /// Stationary Matern 3/2 random field with the given correlation
    /// length in pixels; unit variance, zero mean.
    GpSample { length_scale: f64 },
    /// Checkerboard plus scattered Gaussian blobs; plenty of corners and
    /// blob keypoints for feature tests.
    CheckerPlusBlobs,
    /// Band 0 of a cube on disk (stem without extension).
    FromFile(PathBuf),
}

/// Minimum texture dimension.
pub const MIN_TEXTURE_DIM: usize = 512;

/// Generates a deterministic scene texture. `size` is (height, width).
pub fn generate_texture(kind: &TextureKind, size: (usize, usize), seed: u64) -> Result<SceneTexture> {
    let (h, w) = size;
    if h < MIN_TEXTURE_DIM || w < MIN_TEXTURE_DIM {
        return Err(Error::InvalidInput(format!(
            "texture {h}x{w} below the {MIN_TEXTURE_DIM} px minimum"
        )));
    }
    let raster = match kind {
        TextureKind::GpSample { length_scale } => sample_matern_field(h, w, *length_scale, seed)?,
        TextureKind::CheckerPlusBlobs => checker_plus_blobs(h, w, seed),
        TextureKind::FromFile(stem) => {
            let cube = HyperCube::read(stem)?;
            Array2::from_shape_fn((cube.lines(), cube.samples_per_line()), |(r, c)| {
                cube.value(r, c, 0) as f64
            })
        }
    };
    Ok(SceneTexture { raster, gsd: 1.0 })
}

/// Draws a stationary Matern 3/2 field by circulant embedding: the target
/// covariance is wrapped onto a twice-padded torus, diagonalized by FFT,
/// and colored complex white noise transformed back. Tiny negative
/// embedding eigenvalues are clipped.
pub fn sample_matern_field(h: usize, w: usize, length_scale: f64, seed: u64) -> Result<Array2<f64>> {
    if !(length_scale > 0.0) {
        return Err(Error::InvalidInput("length scale must be positive".into()));
    }
    let params = KernelParams::new(1.0, length_scale, KernelKind::Matern32)?;
    let (eh, ew) = (2 * h, 2 * w);
    let n = eh * ew;

    // Base covariance row on the torus.
    let mut base: Vec<Complex<f64>> = Vec::with_capacity(n);
    for r in 0..eh {
        let dr = r.min(eh - r) as f64;
        for c in 0..ew {
            let dc = c.min(ew - c) as f64;
            let rho = (dr * dr + dc * dc).sqrt();
            base.push(Complex::new(params.at_distance(rho), 0.0));
        }
    }

    let mut planner = FftPlanner::new();
    fft_2d(&mut planner, &mut base, eh, ew, rustfft::FftDirection::Forward);

    // Eigenvalues of the circulant embedding; clip small negatives.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum: Vec<Complex<f64>> = base
        .iter()
        .map(|lambda| {
            let val = lambda.re.max(0.0).sqrt();
            let (a, b): (f64, f64) = (sample_standard_normal(&mut rng), sample_standard_normal(&mut rng));
            Complex::new(a * val, b * val)
        })
        .collect();

    fft_2d(&mut planner, &mut spectrum, eh, ew, rustfft::FftDirection::Inverse);

    // Unnormalized inverse leaves a factor n; sqrt(n) gives unit variance.
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = Array2::zeros((h, w));
    for r in 0..h {
        for c in 0..w {
            out[(r, c)] = spectrum[r * ew + c].re * scale;
        }
    }
    Ok(out)
}

fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

fn fft_2d(
    planner: &mut FftPlanner<f64>,
    data: &mut [Complex<f64>],
    rows: usize,
    cols: usize,
    direction: rustfft::FftDirection,
) {
    let row_fft = planner.plan_fft(cols, direction);
    for r in 0..rows {
        row_fft.process(&mut data[r * cols..(r + 1) * cols]);
    }
    let col_fft = planner.plan_fft(rows, direction);
    let mut column: Vec<Complex<f64>> = vec![Complex::default(); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

fn checker_plus_blobs(h: usize, w: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = 64usize;
    let mut img = Array2::from_shape_fn((h, w), |(r, c)| {
        if ((r / period) + (c / period)) % 2 == 0 {
            0.25
        } else {
            -0.25
        }
    });
    let n_blobs = 40;
    for _ in 0..n_blobs {
        let br = rng.gen_range(30.0..h as f64 - 30.0);
        let bc = rng.gen_range(30.0..w as f64 - 30.0);
        let sigma: f64 = rng.gen_range(2.5..6.0);
        let amp = rng.gen_range(1.0..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let radius = (4.0 * sigma) as isize;
        let (ir, ic) = (br as isize, bc as isize);
        for r in (ir - radius).max(0)..(ir + radius).min(h as isize - 1) {
            for c in (ic - radius).max(0)..(ic + radius).min(w as isize - 1) {
                let d2 = (r as f64 - br).powi(2) + (c as f64 - bc).powi(2);
                img[(r as usize, c as usize)] += amp * (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }
    img
}
