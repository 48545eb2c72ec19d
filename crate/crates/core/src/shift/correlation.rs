//! Cross-correlation shift baseline: integer-lag normalized correlation
//! over sliding windows with parabolic sub-pixel refinement.

use super::ShiftEstimate;
use crate::error::Error;
use crate::Result;

const FLAT_WINDOW_VAR: f64 = 1e-12;

/// Mean normalized cross-correlation per integer lag in
/// `[-max_shift, max_shift]`; index `lag + max_shift`. Flat reference
/// windows are excluded. Returns the surface and the number of windows
/// that contributed.
pub fn correlation_surface(
    line_a: &[f64],
    line_b: &[f64],
    window: usize,
    max_shift: usize,
) -> Result<(Vec<f64>, usize)> {
    if window < 5 {
        return Err(Error::InvalidInput(format!(
            "correlation window must be at least 5 pixels, got {window}"
        )));
    }
    if line_a.len() != line_b.len() {
        return Err(Error::InvalidInput("lines must have equal length".into()));
    }
    let len = line_a.len();
    if len < window + 2 * max_shift {
        return Err(Error::InvalidInput(format!(
            "lines of {len} px too short for window {window} and max shift {max_shift}"
        )));
    }

    let n_lags = 2 * max_shift + 1;
    let mut sums = vec![0.0; n_lags];
    let mut used = 0usize;
    let stride = (window / 2).max(1);
    let mut start = max_shift;
    while start + window + max_shift <= len {
        let a = &line_a[start..start + window];
        let (a_mean, a_var) = mean_var(a);
        if a_var > FLAT_WINDOW_VAR {
            used += 1;
            for (k, s) in sums.iter_mut().enumerate() {
                let lag = k as isize - max_shift as isize;
                let b0 = (start as isize + lag) as usize;
                let b = &line_b[b0..b0 + window];
                let (b_mean, b_var) = mean_var(b);
                if b_var <= FLAT_WINDOW_VAR {
                    continue;
                }
                let mut dot = 0.0;
                for (x, y) in a.iter().zip(b) {
                    dot += (x - a_mean) * (y - b_mean);
                }
                *s += dot / (window as f64 * (a_var * b_var).sqrt());
            }
        }
        start += stride;
    }
    if used == 0 {
        return Ok((sums, 0));
    }
    for s in &mut sums {
        *s /= used as f64;
    }
    Ok((sums, used))
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Correlation-based shift estimate. The correlation peak over integer
/// lags is refined with a 3-point parabolic fit; `dy` is fixed to zero.
/// The negated peak correlation is stored in the `neg_log_posterior`
/// slot as the comparable "lower is better" score.
pub fn estimate_shift_correlation(
    line_a: &[f64],
    line_b: &[f64],
    window: usize,
    max_shift: usize,
) -> Result<ShiftEstimate> {
    let (surface, used) = correlation_surface(line_a, line_b, window, max_shift)?;
    if used == 0 {
        return Ok(ShiftEstimate {
            dx: 0.0,
            dy: 0.0,
            neg_log_posterior: f64::NAN,
            converged: false,
            n_patches: 0,
        });
    }
    let mut best = 0usize;
    for (i, v) in surface.iter().enumerate() {
        if *v > surface[best] {
            best = i;
        }
    }
    let mut dx = best as f64 - max_shift as f64;
    // A peak at exactly 1 is a perfect match; refinement can only move it.
    if best > 0 && best + 1 < surface.len() && surface[best] < 1.0 - 1e-9 {
        let (l, c, r) = (surface[best - 1], surface[best], surface[best + 1]);
        let denom = l - 2.0 * c + r;
        if denom.abs() > 1e-12 {
            dx += ((l - r) / (2.0 * denom)).clamp(-0.5, 0.5);
        }
    }
    Ok(ShiftEstimate {
        dx,
        dy: 0.0,
        neg_log_posterior: -surface[best],
        converged: true,
        n_patches: used,
    })
}
