//! Horizontal rectification: accumulate per-pair shifts into per-line
//! offsets and resample every line.

use crate::cube::HyperCube;
use crate::error::Error;
use crate::interp;
use crate::shift::ShiftSeries;
use crate::Result;
use ndarray::Array2;
use rayon::prelude::*;
use std::fs;
use std::path::Path;

/// Default moving-average window (lines) for detrending accumulated shifts.
pub const DEFAULT_DETREND_WINDOW: usize = 201;

#[derive(Debug, Clone)]
pub struct RectificationMap {
    /// Cumulative cross-track displacement of each line relative to line 0.
    pub per_line_offset: Vec<f64>,
    /// Moving-average window used to remove low-frequency drift; 0 = none.
    pub detrend_window: usize,
}

impl RectificationMap {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = format!("# detrend_window {}\noffset_px\n", self.detrend_window);
        for v in &self.per_line_offset {
            out.push_str(&format!("{v}\n"));
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut detrend_window = 0;
        let mut per_line_offset = Vec::new();
        let mut saw_header = false;
        for row in text.lines() {
            let row = row.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(rest) = row.strip_prefix('#') {
                let mut parts = rest.split_whitespace();
                if parts.next() == Some("detrend_window") {
                    detrend_window = parts.next().and_then(|v| v.parse().ok()).unwrap_or(0);
                }
                continue;
            }
            if !saw_header {
                saw_header = true;
                continue;
            }
            per_line_offset.push(row.parse::<f64>().map_err(|e| Error::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?);
        }
        Ok(Self {
            per_line_offset,
            detrend_window,
        })
    }
}

/// Integrates per-pair shifts into per-line offsets. With a nonzero
/// `detrend_window` a centered moving average is subtracted so only the
/// high-frequency roll distortion remains (drift is left to trajectory
/// and boresight machinery); the result is re-anchored to offset 0 at
/// line 0.
pub fn accumulate_shifts(series: &ShiftSeries, detrend_window: usize) -> Result<RectificationMap> {
    if series.is_empty() {
        return Err(Error::InvalidInput("empty shift series".into()));
    }
    let n = series.len() + 1;
    let mut offsets = Vec::with_capacity(n);
    let mut acc = 0.0;
    offsets.push(0.0);
    for e in &series.estimates {
        acc += e.dx;
        offsets.push(acc);
    }

    if detrend_window > 0 {
        let half = detrend_window / 2;
        let trend: Vec<f64> = (0..n)
            .map(|k| {
                let lo = k.saturating_sub(half);
                let hi = (k + half + 1).min(n);
                offsets[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        for (o, t) in offsets.iter_mut().zip(&trend) {
            *o -= t;
        }
        let anchor = offsets[0];
        for o in &mut offsets {
            *o -= anchor;
        }
    }

    Ok(RectificationMap {
        per_line_offset: offsets,
        detrend_window,
    })
}

/// Resamples every line of the cube by the negated per-line offset using
/// cubic interpolation, identically for all bands. Samples pulled from
/// outside the line become NaN and are cleared in the returned validity
/// mask (`lines x samples`, 1 = valid).
pub fn apply_rectification(
    cube: &HyperCube,
    map: &RectificationMap,
) -> Result<(HyperCube, Array2<u8>)> {
    if map.per_line_offset.len() != cube.lines() {
        return Err(Error::InvalidInput(format!(
            "map has {} offsets for {} lines",
            map.per_line_offset.len(),
            cube.lines()
        )));
    }
    let samples = cube.samples_per_line();
    let bands = cube.bands();

    let rows: Vec<(Vec<f32>, Vec<u8>)> = (0..cube.lines())
        .into_par_iter()
        .map(|line| {
            let offset = map.per_line_offset[line];
            let mut line_data = Vec::with_capacity(bands * samples);
            let mut mask_row = vec![1u8; samples];
            for band in 0..bands {
                let src: Vec<f64> = cube
                    .line_band(line, band)
                    .iter()
                    .map(|v| *v as f64)
                    .collect();
                for x in 0..samples {
                    match interp::sample_line(&src, x as f64 + offset) {
                        Some(v) => line_data.push(v as f32),
                        None => {
                            line_data.push(f32::NAN);
                            mask_row[x] = 0;
                        }
                    }
                }
            }
            (line_data, mask_row)
        })
        .collect();

    let mut data = Vec::with_capacity(cube.lines() * bands * samples);
    let mut mask = Array2::ones((cube.lines(), samples));
    for (line, (line_data, mask_row)) in rows.into_iter().enumerate() {
        data.extend(line_data);
        for (x, m) in mask_row.into_iter().enumerate() {
            mask[(line, x)] = m;
        }
    }

    let rectified = HyperCube::new_with_gaps(
        cube.lines(),
        samples,
        bands,
        data,
        cube.line_times().to_vec(),
    )?;
    Ok((rectified, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::ShiftEstimate;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn series_from_dx(dx: &[f64]) -> ShiftSeries {
        ShiftSeries {
            estimates: dx
                .iter()
                .map(|&dx| ShiftEstimate {
                    dx,
                    dy: 0.0,
                    neg_log_posterior: 0.0,
                    converged: true,
                    n_patches: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn zero_shifts_give_zero_offsets() {
        let map = accumulate_shifts(&series_from_dx(&[0.0; 10]), 0).unwrap();
        assert!(map.per_line_offset.iter().all(|v| *v == 0.0));
        assert_eq!(map.per_line_offset.len(), 11);
    }

    #[test]
    fn constant_shift_accumulates_linearly() {
        let map = accumulate_shifts(&series_from_dx(&[0.5; 8]), 0).unwrap();
        for (k, v) in map.per_line_offset.iter().enumerate() {
            assert_relative_eq!(*v, 0.5 * k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn detrend_removes_slow_drift_keeps_fast_wiggle() {
        // dx = fast sinusoid + slow drift; a wide window should keep the
        // integrated sinusoid and drop the drift.
        let n = 800;
        let period = 40.0;
        let dx: Vec<f64> = (0..n)
            .map(|k| 0.4 * (2.0 * std::f64::consts::PI * k as f64 / period).sin() + 0.02)
            .collect();
        let expected: Vec<f64> = {
            // integral of the sinusoid only
            let mut acc = 0.0;
            let mut out = vec![0.0];
            for k in 0..n {
                acc += 0.4 * (2.0 * std::f64::consts::PI * k as f64 / period).sin();
                out.push(acc);
            }
            out
        };
        let map = accumulate_shifts(&series_from_dx(&dx), 301).unwrap();
        assert_relative_eq!(map.per_line_offset[0], 0.0);
        // Compare away from the edges where the moving average is truncated.
        let mut sq = 0.0;
        let mut count = 0;
        for k in 200..n - 200 {
            let d = map.per_line_offset[k] - (expected[k] - expected[200] + map.per_line_offset[200]);
            sq += d * d;
            count += 1;
        }
        let rmse = (sq / count as f64).sqrt();
        assert!(rmse < 0.5, "detrended rmse {rmse}");
    }

    fn smooth_cube(seed: u64, lines: usize, samples: usize, bands: usize) -> HyperCube {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<f64> = (0..samples + 16).map(|_| rng.gen_range(0.0..100.0)).collect();
        let mut data = Vec::new();
        for l in 0..lines {
            for band in 0..bands {
                for s in 0..samples {
                    let v = base[s..s + 8].iter().sum::<f64>() / 8.0;
                    data.push((v + l as f64 + band as f64 * 10.0) as f32);
                }
            }
        }
        HyperCube::new(lines, samples, bands, data, (0..lines).map(|i| i as f64).collect())
            .unwrap()
    }

    #[test]
    fn zero_map_is_identity() {
        let cube = smooth_cube(1, 5, 32, 2);
        let map = RectificationMap {
            per_line_offset: vec![0.0; 5],
            detrend_window: 0,
        };
        let (out, mask) = apply_rectification(&cube, &map).unwrap();
        assert!(mask.iter().all(|m| *m == 1));
        for l in 0..5 {
            for b in 0..2 {
                assert_eq!(out.line_band(l, b), cube.line_band(l, b));
            }
        }
    }

    #[test]
    fn integer_offsets_relocate_samples_exactly() {
        let cube = smooth_cube(2, 3, 32, 1);
        let map = RectificationMap {
            per_line_offset: vec![0.0, 2.0, -3.0],
            detrend_window: 0,
        };
        let (out, mask) = apply_rectification(&cube, &map).unwrap();
        // line 1 shifted by -2: out[x] = in[x + 2]
        for x in 0..30 {
            assert_eq!(out.value(1, x, 0), cube.value(1, x + 2, 0));
        }
        assert_eq!(mask[(1, 30)], 0);
        assert_eq!(mask[(1, 31)], 0);
        // line 2: out[x] = in[x - 3]
        for x in 3..32 {
            assert_eq!(out.value(2, x, 0), cube.value(2, x - 3, 0));
        }
        assert_eq!(mask[(2, 0)], 0);
        assert_eq!(mask[(2, 2)], 0);
        assert_eq!(mask[(2, 3)], 1);
    }

    #[test]
    fn mask_width_bounded_by_offset_magnitude() {
        let cube = smooth_cube(3, 4, 40, 1);
        let map = RectificationMap {
            per_line_offset: vec![0.0, 1.4, -2.7, 0.2],
            detrend_window: 0,
        };
        let (_, mask) = apply_rectification(&cube, &map).unwrap();
        for (line, offset) in map.per_line_offset.iter().enumerate() {
            let invalid = mask.row(line).iter().filter(|m| **m == 0).count();
            let bound = offset.abs().ceil() as usize + 1;
            assert!(invalid <= bound, "line {line}: {invalid} invalid > {bound}");
        }
    }

    #[test]
    fn rectification_commutes_with_band_mean() {
        let cube = smooth_cube(4, 6, 48, 3);
        let map = RectificationMap {
            per_line_offset: vec![0.0, 0.7, -1.3, 2.1, 0.4, -0.6],
            detrend_window: 0,
        };
        let (out, _) = apply_rectification(&cube, &map).unwrap();
        for line in 0..cube.lines() {
            let rectified_then_mean = out.pan_line(line);
            let src = cube.pan_line(line);
            for x in 0..cube.samples_per_line() {
                let mean_then_rectified =
                    crate::interp::sample_line(&src, x as f64 + map.per_line_offset[line]);
                match mean_then_rectified {
                    Some(v) => assert_relative_eq!(rectified_then_mean[x], v, epsilon = 1e-4),
                    None => assert!(rectified_then_mean[x].is_nan()),
                }
            }
        }
    }
}
